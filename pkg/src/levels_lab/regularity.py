"""Parameter conditions, the scaling-factor and piece estimates, and empirical
Hölder seminorms of f' and g'.

The displayed bounds all carry an unspecified constant.  Reports therefore
give, for each bound, the smallest constant that makes it hold over the
computed range ("fitted M"), together with decay flags.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bridge import GridSpec, PowerModulus, lemma_value, unit_derivative
from .errors import ParameterError, RangeError, ThresholdError
from .generators import PiecewiseDiffeo, build_f, build_g
from .partition import Params, PartitionModel, Schedule, build_partition

GOLDEN_THRESHOLD = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ParameterCheck:
    alpha: float
    theta: float
    epsilon: float
    product: float  # (1 + eps)(1 + theta) alpha
    holder_product_ok: bool  # product < 1
    tail_ok: bool  # 1 / (1 + eps) > alpha
    shrink_ok: bool  # theta > alpha

    @property
    def passed(self) -> bool:
        return self.holder_product_ok and self.tail_ok and self.shrink_ok

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "theta": self.theta,
            "epsilon": self.epsilon,
            "conditions": {
                "(1+eps)(1+theta)alpha < 1": {"value": self.product, "ok": self.holder_product_ok},
                "1/(1+eps) > alpha": {"value": 1.0 / (1.0 + self.epsilon), "ok": self.tail_ok},
                "theta > alpha": {"value": self.theta, "ok": self.shrink_ok},
            },
            "passed": self.passed,
        }


def check_parameters(alpha: float, theta: float, epsilon: float) -> ParameterCheck:
    if not (alpha > 0 and theta > 0 and epsilon > 0):
        raise ParameterError(f"alpha, theta, epsilon must be positive: {alpha}, {theta}, {epsilon}")
    product = (1 + epsilon) * (1 + theta) * alpha
    return ParameterCheck(
        alpha=alpha,
        theta=theta,
        epsilon=epsilon,
        product=product,
        holder_product_ok=product < 1,
        tail_ok=1 / (1 + epsilon) > alpha,
        shrink_ok=theta > alpha,
    )


def default_theta_epsilon(alpha: float, j_max: int = 60) -> Tuple[float, float]:
    """(theta, eps) = (alpha + eps, eps) with eps the largest 2**-j that passes."""
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    for j in range(j_max + 1):
        eps = 2.0 ** -j
        if check_parameters(alpha, alpha + eps, eps).passed:
            return alpha + eps, eps
    raise ThresholdError(
        f"no admissible epsilon for alpha={alpha}: theta = alpha + eps requires "
        f"alpha < (sqrt(5) - 1)/2 = {GOLDEN_THRESHOLD:.12f}"
    )


def admits_epsilon(alpha: float, j_max: int = 60) -> bool:
    try:
        default_theta_epsilon(alpha, j_max)
    except ThresholdError:
        return False
    return True


# ---------------------------------------------------------------------------
# scaling factors


@dataclass
class LambdaReport:
    schedule: str
    records: List[dict]
    fitted_growth_M: float
    fitted_decay_M: float
    growth_bounded: bool
    decay_bounded: bool
    lambda_to_one: bool

    def to_json(self) -> dict:
        return {
            "schedule": self.schedule,
            "fitted_growth_M": self.fitted_growth_M,
            "fitted_decay_M": self.fitted_decay_M,
            "growth_bounded": self.growth_bounded,
            "decay_bounded": self.decay_bounded,
            "lambda_to_one": self.lambda_to_one,
            "records": self.records,
        }


def _bounded(values: Sequence[float]) -> bool:
    """Finite-range proxy for boundedness: the second half never exceeds
    twice the largest value seen in the first half."""
    if len(values) < 2:
        return True
    half = max(1, len(values) // 2)
    return max(values[half:]) <= 2 * max(values[:half])


def lambda_bounds_report(model: PartitionModel) -> LambdaReport:
    p = model.params
    records = []
    for k in sorted(model.lam):
        lam = model.lam[k]
        N = p.chain_length(k)
        records.append(
            {
                "k": k,
                "lambda": lam,
                "lambda_pow": lam ** N,
                # lambda^{2^k} <= M 2^{k theta (1+eps)}
                "growth_ratio": math.exp(N * math.log(lam) - k * p.theta * (1 + p.epsilon) * math.log(2)),
                # |lambda - 1| <= M k / 2^k
                "decay_ratio": abs(lam - 1) * 2.0 ** k / k,
            }
        )
    growth = [r["growth_ratio"] for r in records]
    decay = [r["decay_ratio"] for r in records]
    dist = [abs(r["lambda"] - 1) for r in records]
    return LambdaReport(
        schedule=p.schedule.value,
        records=records,
        fitted_growth_M=max(growth, default=0.0),
        fitted_decay_M=max(decay, default=0.0),
        growth_bounded=_bounded(growth),
        decay_bounded=_bounded(decay),
        lambda_to_one=len(dist) < 2 or (all(b < a for a, b in zip(dist, dist[1:])) and dist[-1] < 0.5 * dist[0]),
    )


# ---------------------------------------------------------------------------
# the three piece estimates


@dataclass
class EstimateReport:
    alpha: float
    records: List[dict]  # k, i, quantity2, bound2, quantity3, bound3
    level_records: List[dict]  # k, quantity4, bound4
    fitted_M2: float
    fitted_M3: float
    fitted_M4: float
    max2: Dict[int, float]
    max3: Dict[int, float]
    exponents: Dict[str, float]
    lemma_exceptions: List[dict] = field(default_factory=list)

    def decay_ratios(self, which: int, ks: Sequence[int]) -> List[float]:
        seq = self.max2 if which == 2 else self.max3
        return [seq[k + 1] / seq[k] for k in ks[:-1]]

    def geometric_decay(self, which: int, ks: Sequence[int], ratio: float = 0.9) -> bool:
        return all(q <= ratio for q in self.decay_ratios(which, ks))

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "fitted_M2": self.fitted_M2,
            "fitted_M3": self.fitted_M3,
            "fitted_M4": self.fitted_M4,
            "bound_exponents": self.exponents,
            "bounds_vanish": {key: val < 0 for key, val in self.exponents.items()},
            "max_quantity2": {str(k): v for k, v in self.max2.items()},
            "max_quantity3": {str(k): v for k, v in self.max3.items()},
            "levels": self.level_records,
            "lemma_exceptions": self.lemma_exceptions,
        }


def estimate_quantities(model: PartitionModel, alpha: Optional[float] = None) -> EstimateReport:
    p = model.params
    alpha = p.alpha if alpha is None else alpha
    eps, theta = p.epsilon, p.theta
    omega = PowerModulus(alpha)
    records = []
    max2: Dict[int, float] = {}
    max3: Dict[int, float] = {}
    exceptions = []
    for k in sorted(model.lam):
        lam = model.lam[k]
        N = p.chain_length(k)
        bound2 = k / 2.0 ** k * 2.0 ** (k * (1 + eps) * (1 + theta) * alpha)
        bound3 = k * 2.0 ** (-k * (1 - (1 + eps) * alpha))
        for i in range(N):
            n = p.n_k(k + 1) - i
            A = model.chain_length_global(k, i)
            C = model.chain_length_global(k, i + 1)
            B = model.length(n)
            D = model.length(n - 1)
            q2 = abs(lam - 1) / A ** alpha
            q3 = abs((D - C) / (B - A) - 1) * 2 ** alpha / (B - A) ** alpha
            records.append({"k": k, "i": i, "quantity2": q2, "bound2": bound2, "quantity3": q3, "bound3": bound3})
            max2[k] = max(max2.get(k, 0.0), q2)
            max3[k] = max(max3.get(k, 0.0), q3)
            # smoothing-lemma ratio hypothesis for the marked and gap pieces
            if not 0.5 <= C / A <= 2.0:
                exceptions.append({"map": "f", "k": k, "i": i, "piece": "marked", "ratio": C / A})
            if not 0.5 <= (D - C) / (B - A) <= 2.0:
                exceptions.append({"map": "f", "k": k, "i": i, "piece": "gap", "ratio": (D - C) / (B - A)})

    level_records = []
    for k in model.levels:
        bc, uv = model.bc[k], model.uv[k]
        gap = (bc - uv) / 2
        q4 = uv / gap ** (1 + alpha)
        level_records.append({"k": k, "quantity4": q4, "bound4": bc ** (theta - alpha)})
        for side, (len_in, len_out) in (("left", (gap, gap + uv)), ("right", (gap + uv, gap))):
            if not 0.5 <= len_in / len_out <= 2.0:
                exceptions.append({"map": "g", "k": k, "piece": side, "ratio": len_out / len_in})

    def fitted(rows, q, b):
        return max((r[q] / r[b] for r in rows), default=0.0)

    return EstimateReport(
        alpha=alpha,
        records=records,
        level_records=level_records,
        fitted_M2=fitted(records, "quantity2", "bound2"),
        fitted_M3=fitted(records, "quantity3", "bound3"),
        fitted_M4=fitted(level_records, "quantity4", "bound4"),
        max2=max2,
        max3=max3,
        exponents={
            "bound2": (1 + eps) * (1 + theta) * alpha - 1,
            "bound3": (1 + eps) * alpha - 1,
            "bound4": -(theta - alpha),  # bc_length^(theta-alpha) -> 0 iff theta > alpha
        },
        lemma_exceptions=exceptions,
    )


# ---------------------------------------------------------------------------
# empirical seminorms


def piecewise_omega_norm(diffeo: PiecewiseDiffeo, alpha: float, grid: GridSpec = GridSpec()) -> float:
    """Sampled sup of |D(x) - D(y)| / |x - y|**alpha for D = diffeo'.

    Pairs are taken inside every piece at scales |piece| * 2**-j and across
    every knot at scales min(|left|, |right|) * 2**-j.  Each scale also
    carries pairs anchored at a knot and at a piece midpoint.
    """
    lengths, ratios = diffeo.piece_table()
    active = ratios != 1.0
    best = 0.0
    for j in range(grid.j_min, grid.j_max + 1):
        frac = 2.0 ** -j
        u = np.concatenate(([0.0, 0.5, max(0.5 - frac, 0.0) / max(1 - frac, 1e-300)], grid.positions(j)))
        u = np.clip(u, 0.0, 1.0)
        # within pieces
        L = lengths[active][:, None]
        r = ratios[active][:, None]
        if L.size:
            t1 = u[None, :] * (1 - frac)
            t2 = t1 + frac
            d1 = unit_derivative(t1, 1 - t1, r)
            d2 = unit_derivative(t2, 1 - t2, r)
            q = np.abs(d2 - d1) / (L * frac) ** alpha
            best = max(best, float(q.max()))
        # across knots
        if len(lengths) > 1:
            left_L, right_L = lengths[:-1, None], lengths[1:, None]
            keep = (ratios[:-1] != 1.0) | (ratios[1:] != 1.0)
            if keep.any():
                left_L, right_L = left_L[keep], right_L[keep]
                h = np.minimum(left_L, right_L) * frac
                dl = u[None, :] * h
                dr = h - dl
                tl = dl / left_L
                tr = dr / right_L
                d_left = unit_derivative(1 - tl, tl, ratios[:-1][keep][:, None])
                d_right = unit_derivative(tr, 1 - tr, ratios[1:][keep][:, None])
                q = np.abs(d_right - d_left) / h ** alpha
                best = max(best, float(q.max()))
    return best


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("LEVELS_LAB_THREADS", "1")))
    except ValueError:
        return 1


def empirical_holder_sweep(
    params: Params,
    depths: Sequence[int],
    grid: GridSpec = GridSpec(),
    which: str = "f",
    alpha: Optional[float] = None,
) -> List[Tuple[int, float]]:
    """Seminorm of f' (or g') at each truncation depth k_max in ``depths``."""
    alpha = params.alpha if alpha is None else alpha
    if which not in ("f", "g"):
        raise ParameterError(f"which must be 'f' or 'g', got {which!r}")

    def one(depth: int) -> Tuple[int, float]:
        try:
            model = build_partition(replace(params, k_max=depth))
        except RangeError as exc:
            raise RangeError(f"depth {depth} exceeds feasible precision: {exc}") from None
        diffeo = build_f(model) if which == "f" else build_g(model, verify=False)
        return depth, piecewise_omega_norm(diffeo, alpha, grid)

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        return list(pool.map(one, depths))
