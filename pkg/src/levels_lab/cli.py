"""Command line front end: tables, evaluation, regularity reports, descent certificates.

Exit codes: 0 success, 1 failed check or out-of-domain input, 2 bad configuration.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import re
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .bridge import GridSpec
from .dynamics import descent_cascade, descent_certificate, verify_certificate
from .errors import LevelsError, ParameterError, RangeError, ThresholdError
from .generators import GroupAction, Word
from .partition import LocalPoint, Params, Schedule, build_partition
from .regularity import (
    GOLDEN_THRESHOLD,
    check_parameters,
    default_theta_epsilon,
    empirical_holder_sweep,
    estimate_quantities,
    lambda_bounds_report,
)


@dataclass
class Config:
    alpha: float = 0.5
    epsilon: Optional[float] = None  # None: largest admissible 2^-j
    theta: Optional[float] = None  # None: alpha + epsilon
    schedule: str = "pow2"
    k_max: int = 10
    n_neg: int = 32
    precision: int = 53
    tol: float = 1e-12
    seed: int = 42
    out: str = "out"
    # regularity
    grid_j_min: int = 0
    grid_j_max: int = 10
    grid_samples: int = 64
    depths: Optional[List[int]] = None  # None: 6..k_max
    # descent
    m_max: int = 10 ** 6
    cascade: Optional[List[int]] = None  # [k_from, k_to]; None: [1, min(4, k_max - 1)]
    # eval / graph
    map: str = "f"
    points: Optional[List[str]] = None
    word: Optional[str] = None
    resolution: int = 16

    def validate(self) -> None:
        if self.schedule not in ("pow2", "linear"):
            raise ParameterError(f"schedule must be 'pow2' or 'linear', got {self.schedule!r}")
        if self.map not in ("f", "g"):
            raise ParameterError(f"map must be 'f' or 'g', got {self.map!r}")
        if self.resolution < 1 or self.m_max < 0:
            raise ParameterError("resolution must be >= 1 and m_max >= 0")
        if self.cascade is not None and len(self.cascade) != 2:
            raise ParameterError(f"cascade must be [k_from, k_to], got {self.cascade}")

    def params(self) -> Params:
        if self.epsilon is None:
            theta, eps = default_theta_epsilon(self.alpha)
            if self.theta is not None:
                theta = self.theta
        else:
            eps = self.epsilon
            theta = self.alpha + eps if self.theta is None else self.theta
        return Params(
            alpha=self.alpha,
            epsilon=eps,
            theta=theta,
            k_max=self.k_max,
            n_neg=self.n_neg,
            schedule=Schedule(self.schedule),
            precision=self.precision,
            tol=self.tol,
        )

    def grid(self) -> GridSpec:
        return GridSpec(self.grid_j_min, self.grid_j_max, self.grid_samples, self.seed)


def _check_type(name: str, value, annotation: str):
    base = annotation.replace("Optional[", "").rstrip("]")
    if value is None:
        if annotation.startswith("Optional"):
            return None
        raise ParameterError(f"config key {name!r} may not be null")
    if base.startswith("List[int"):
        if not (isinstance(value, list) and all(isinstance(v, int) and not isinstance(v, bool) for v in value)):
            raise ParameterError(f"config key {name!r} must be a list of integers")
        return value
    if base.startswith("List[str"):
        if not (isinstance(value, list) and all(isinstance(v, (str, int, float)) for v in value)):
            raise ParameterError(f"config key {name!r} must be a list of point names or numbers")
        return [str(v) for v in value]
    if base == "int":
        if not isinstance(value, int) or isinstance(value, bool):
            raise ParameterError(f"config key {name!r} must be an integer, got {value!r}")
        return value
    if base == "float":
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ParameterError(f"config key {name!r} must be a number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise ParameterError(f"config key {name!r} must be a string, got {value!r}")
    return value


def load_config(path: Optional[str], overrides: Dict) -> Config:
    data = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ParameterError(f"cannot read config {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ParameterError(f"malformed config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ParameterError(f"config {path} must hold a JSON object")
        if isinstance(data.get("grid_spec"), dict):
            grid = data.pop("grid_spec")
            for key, val in grid.items():
                data[f"grid_{key}"] = val
    data.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name: f for f in dataclasses.fields(Config)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ParameterError(f"unknown config keys: {', '.join(unknown)}")
    typed = {k: _check_type(k, v, str(known[k].type)) for k, v in data.items()}
    cfg = Config(**typed)
    cfg.validate()
    return cfg


# ---- output ------------------------------------------------------------


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _clean(obj.item())
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dumps_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_outputs(out_dir: str, files: Dict[str, str]) -> List[str]:
    """Write every file atomically; nothing is written unless all contents were built."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name, text in files.items():
        path = os.path.join(out_dir, name)
        fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=f".{name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        written.append(path)
    return written


# ---- commands ------------------------------------------------------------


def cmd_params(cfg: Config) -> int:
    eps, theta = cfg.epsilon, cfg.theta
    if eps is None:
        try:
            theta_d, eps = default_theta_epsilon(cfg.alpha)
        except ThresholdError as exc:
            verdict = {"alpha": cfg.alpha, "golden_threshold": GOLDEN_THRESHOLD, "below_threshold": False, "passed": False}
            print(dumps_json(verdict), end="")
            print(str(exc), file=sys.stderr)
            return 1
        theta = theta_d if theta is None else theta
    elif theta is None:
        theta = cfg.alpha + eps
    check = check_parameters(cfg.alpha, theta, eps)
    verdict = check.to_json()
    verdict["golden_threshold"] = GOLDEN_THRESHOLD
    verdict["below_threshold"] = cfg.alpha < GOLDEN_THRESHOLD
    print(dumps_json(verdict), end="")
    if not check.passed:
        print(
            f"parameter conditions fail; with theta = alpha + eps an admissible eps exists "
            f"only for alpha < (sqrt(5)-1)/2 = {GOLDEN_THRESHOLD!r}",
            file=sys.stderr,
        )
        return 1
    return 0


def cmd_table(cfg: Config) -> int:
    model = build_partition(cfg.params())
    rows = []
    for k in model.levels:
        b, c = model.bc_points(k)
        u, v = model.uv_points(k)
        rows.append(
            [k, model.params.n_k(k), model.to_global(b), model.to_global(c), model.to_global(u), model.to_global(v),
             model.bc[k], model.uv[k], model.lam.get(k)]
        )
    header = ["k", "n_k", "b_k", "c_k", "u_k", "v_k", "bc_length", "uv_length", "lambda_k"]
    files = {"partition.json": dumps_json(model.to_json()), "levels.csv": dumps_csv(header, rows)}
    for path in write_outputs(cfg.out, files):
        print(path)
    return 0


_NAMED = re.compile(r"^([abcuv])(-?\d+)$")


def parse_point(model, text: str) -> LocalPoint:
    """A number in [0, 1] or a name a<n>, b<k>, c<k>, u<k>, v<k>."""
    m = _NAMED.match(text.strip())
    if m:
        kind, idx = m.group(1), int(m.group(2))
        if kind == "a":
            if idx - 1 < model.n_lo or idx - 1 > model.n_hi:
                raise RangeError(f"a{idx} is outside the materialized range")
            return model.canonical(idx - 1, 0.0)
        if idx not in model.levels:
            raise RangeError(f"level {idx} is not materialized (levels 1..{model.params.k_max})", needed_k_max=idx)
        b, c = model.bc_points(idx)
        u, v = model.uv_points(idx)
        return {"b": b, "c": c, "u": u, "v": v}[kind]
    try:
        x = float(text)
    except ValueError:
        raise ParameterError(f"cannot parse point {text!r}") from None
    if not 0.0 <= x <= 1.0:
        raise RangeError(f"point {x!r} lies outside [0, 1]")
    return model.to_local(x)


def cmd_eval(cfg: Config) -> int:
    model = build_partition(cfg.params())
    action = GroupAction(model)
    word = Word.parse(cfg.word) if cfg.word is not None else Word.of((cfg.map.upper(), 1))
    rows = []
    bad = 0
    for text in cfg.points or []:
        try:
            p = parse_point(model, text)
            y, d = action.apply_word(word, p, with_derivative=True)
            rows.append([model.to_global(p), model.to_global(y), d, "ok"])
        except (RangeError, ParameterError) as exc:
            bad += 1
            rows.append([text, None, None, f"error: {exc}"])
    sys.stdout.write(dumps_csv(["x", "y", "dydx", "status"], rows))
    return 1 if bad else 0


def _estimate_files(model) -> Dict[str, str]:
    report = estimate_quantities(model)
    rows = [[r["k"], r["i"], r["quantity2"], r["bound2"], r["quantity3"], r["bound3"]] for r in report.records]
    summary = report.to_json()
    summary["lambda"] = lambda_bounds_report(model).to_json()
    p = model.params
    summary["parameters"] = check_parameters(p.alpha, p.theta, p.epsilon).to_json()
    return {
        "estimates.csv": dumps_csv(["k", "i", "quantity2", "bound2", "quantity3", "bound3"], rows),
        "estimates.json": dumps_json(summary),
    }


def cmd_estimates(cfg: Config) -> int:
    files = _estimate_files(build_partition(cfg.params()))
    for path in write_outputs(cfg.out, files):
        print(path)
    return 0


def cmd_holder(cfg: Config) -> int:
    params = cfg.params()
    files = _estimate_files(build_partition(params))
    depths = cfg.depths or list(range(min(6, params.k_max), params.k_max + 1))
    sweep = empirical_holder_sweep(params, depths, cfg.grid())
    if params.schedule is Schedule.LINEAR:
        # the requested schedule is the negative control; pair it with the pow2 reference
        ref = empirical_holder_sweep(dataclasses.replace(params, schedule=Schedule.POW2), depths, cfg.grid())
        header = ["depth", "seminorm_pow2", "seminorm_linear_negative_control"]
        rows = [[d, r, s] for (d, s), (_, r) in zip(sweep, ref)]
    else:
        header = ["depth", "seminorm_pow2"]
        rows = [[d, s] for d, s in sweep]
    files["holder_sweep.csv"] = dumps_csv(header, rows)
    for path in write_outputs(cfg.out, files):
        print(path)
    return 0


def cmd_descent(cfg: Config) -> int:
    model = build_partition(cfg.params())
    action = GroupAction(model)
    certs = []
    for k in range(1, model.params.k_max):
        cert = descent_certificate(action, k, cfg.m_max)
        entry = cert.to_json()
        entry["verified_margin"] = verify_certificate(action, cert) if cert.found else None
        entry["required_margin"] = 1e-6 * model.bc[k + 1]
        certs.append(entry)
    k_from, k_to = cfg.cascade or [1, min(4, model.params.k_max - 1)]
    cascade = descent_cascade(action, k_from, k_to, cfg.m_max) if k_to >= k_from >= 1 else None
    ok = all(c["found"] and c["verified_margin"] >= c["required_margin"] for c in certs)
    ok = ok and (cascade is None or cascade.complete)
    doc = {
        "params": model.params.to_dict(),
        "certificates": certs,
        "cascade": None if cascade is None else cascade.to_json(),
        "all_found": ok,
    }
    for path in write_outputs(cfg.out, {"descent.json": dumps_json(doc)}):
        print(path)
    if not ok:
        for c in certs:
            if not c["found"]:
                print(f"level {c['k']}: no certificate with m <= {cfg.m_max}; closest approach {c['closest']!r}",
                      file=sys.stderr)
        return 1
    return 0


def cmd_graph(cfg: Config) -> int:
    model = build_partition(cfg.params())
    action = GroupAction(model)
    diffeo = action.f if cfg.map == "f" else action.g
    rows = []
    for n in sorted(diffeo.pieces, reverse=True):
        for j in range(cfg.resolution):
            p = LocalPoint(n, (j + 0.5) / cfg.resolution)
            rows.append([model.to_global(p), model.to_global(diffeo.eval(p)), diffeo.derivative(p)])
    name = f"graph_{cfg.map}.csv"
    for path in write_outputs(cfg.out, {name: dumps_csv(["x", f"{cfg.map}(x)", f"d{cfg.map}dx"], rows)}):
        print(path)
    return 0


COMMANDS = {
    "params": cmd_params,
    "table": cmd_table,
    "eval": cmd_eval,
    "estimates": cmd_estimates,
    "holder": cmd_holder,
    "descent": cmd_descent,
    "graph": cmd_graph,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--alpha", type=float)
    common.add_argument("--k-max", dest="k_max", type=int)
    common.add_argument("--schedule", choices=["pow2", "linear"])
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--seed", type=int)
    common.add_argument("--precision-bits", dest="precision", type=int)

    parser = argparse.ArgumentParser(prog="levels-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("params", parents=[common], help="check the parameter conditions")
    sub.add_parser("table", parents=[common], help="write partition.json and levels.csv")
    ev = sub.add_parser("eval", parents=[common], help="evaluate f, g or a word at points")
    ev.add_argument("--map", choices=["f", "g"])
    ev.add_argument("--points", nargs="+", help="numbers in [0, 1] or names a5, b2, u3, v3, c2")
    ev.add_argument("--word", help='word such as "F^-2 G^3", applied left to right')
    sub.add_parser("estimates", parents=[common], help="write the estimate report")
    sub.add_parser("holder", parents=[common], help="estimate report plus depth sweep of the seminorm")
    sub.add_parser("descent", parents=[common], help="write descent certificates")
    gr = sub.add_parser("graph", parents=[common], help="sample the graph of f or g")
    gr.add_argument("--map", choices=["f", "g"])
    gr.add_argument("--resolution", type=int, help="samples per fundamental interval")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        cfg = load_config(args.config, overrides)
        if args.command != "params":
            cfg.params()  # surface parameter errors before any work
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](cfg)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (LevelsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
