import csv
import io
import json
import os
import subprocess
import sys

import pytest

from levels_lab.cli import load_config, main
from levels_lab.errors import ParameterError
from levels_lab.partition import Params, interval_length, lambda_k


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_params_default_passes(capsys):
    code, out, _ = run(capsys, "params")
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] and doc["epsilon"] == 0.125 and doc["theta"] == 0.625
    assert len(doc["conditions"]) == 3


def test_params_above_threshold_fails(capsys):
    code, out, err = run(capsys, "params", "--alpha", "0.62")
    assert code == 1
    assert "(sqrt(5) - 1)/2" in err or "(sqrt(5)-1)/2" in err
    assert json.loads(out)["passed"] is False


def test_params_explicit_failure(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"alpha": 0.5, "epsilon": 0.5, "theta": 0.6}))
    code, out, err = run(capsys, "params", "--config", str(cfg))
    assert code == 1 and "0.618" in err


@pytest.mark.parametrize(
    "content",
    ['{"alpha": 0.5, "colour": 1}', '{"alpha": "half"}', "[1, 2]", '{"alpha": 0.5', '{"schedule": "cubic"}'],
)
def test_bad_config_exits_2(capsys, tmp_path, content):
    cfg = tmp_path / "c.json"
    cfg.write_text(content)
    code, _, err = run(capsys, "table", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 2 and err.startswith("error:")
    assert not (tmp_path / "o").exists()


def test_missing_config_exits_2(capsys, tmp_path):
    code, _, _ = run(capsys, "params", "--config", str(tmp_path / "nope.json"))
    assert code == 2


def test_bad_flag_exits_2(capsys):
    assert main(["table", "--schedule", "cubic"]) == 2
    capsys.readouterr()


def test_config_grid_spec_and_overrides(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"alpha": 0.3, "grid_spec": {"samples": 8, "j_max": 5}, "k_max": 5}))
    c = load_config(str(cfg), {"k_max": 7})
    assert c.alpha == 0.3 and c.k_max == 7 and c.grid().samples == 8 and c.grid().j_max == 5
    with pytest.raises(ParameterError):
        load_config(str(cfg), {"map": "h"})


def test_table_outputs(capsys, tmp_path):
    out = tmp_path / "t"
    code, stdout, _ = run(capsys, "table", "--k-max", "6", "--out", str(out))
    assert code == 0 and "levels.csv" in stdout
    params = Params.with_defaults(0.5, k_max=6)
    rows = read_csv(out / "levels.csv")
    assert [int(r["k"]) for r in rows] == list(range(1, 7))
    for r in rows:
        k = int(r["k"])
        assert float(r["bc_length"]) == interval_length(2 ** k, params) / 2
        if k < 6:
            assert float(r["lambda_k"]) == pytest.approx(lambda_k(k, params), rel=1e-12)
        else:
            assert r["lambda_k"] == ""
        assert float(r["b_k"]) < float(r["u_k"]) < float(r["v_k"]) < float(r["c_k"])
    doc = json.loads((out / "partition.json").read_text())
    assert list(doc) == ["params", "c_eps", "tail_mass", "intervals", "levels"]
    assert not [p for p in os.listdir(out) if p.endswith(".tmp")]


@pytest.mark.parametrize(
    "argv,files",
    [
        (["table"], ["partition.json", "levels.csv"]),
        (["holder", "--k-max", "7", "--schedule", "linear"], ["estimates.csv", "estimates.json", "holder_sweep.csv"]),
        (["descent"], ["descent.json"]),
        (["graph", "--map", "g", "--resolution", "3"], ["graph_g.csv"]),
    ],
)
def test_outputs_byte_identical_across_runs(capsys, tmp_path, argv, files):
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b")]) == 0
    capsys.readouterr()
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_eval_examples(capsys):
    code, out, _ = run(capsys, "eval", "--map", "g", "--points", "u3", "b3", "0.3")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    code2, out2, _ = run(capsys, "eval", "--map", "g", "--points", "v3")
    v3 = next(csv.DictReader(io.StringIO(out2)))["x"]
    assert rows[0]["y"] == v3
    assert rows[1]["y"] == rows[1]["x"]  # g fixes b_k
    assert rows[2]["y"] == rows[2]["x"] and rows[2]["dydx"] == "1.0"


def test_eval_f_shifts(capsys):
    _, out, _ = run(capsys, "eval", "--map", "f", "--points", "a6", "a5")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["y"] == rows[1]["x"]


def test_eval_identity_word(capsys):
    code, out, _ = run(capsys, "eval", "--word", "F^-2 G^3 G^-3 F^2", "--points", "0.4", "a7")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    for r in rows:
        assert float(r["y"]) == pytest.approx(float(r["x"]), abs=1e-15)


def test_eval_out_of_domain_rows(capsys):
    code, out, _ = run(capsys, "eval", "--map", "f", "--points", "0.4", "1.5", "u99")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 1
    assert rows[0]["status"] == "ok"
    assert rows[1]["status"].startswith("error") and rows[2]["status"].startswith("error")


def test_descent_command(capsys, tmp_path):
    code, _, _ = run(capsys, "descent", "--k-max", "6", "--out", str(tmp_path))
    doc = json.loads((tmp_path / "descent.json").read_text())
    assert code == 0 and doc["all_found"]
    assert [c["k"] for c in doc["certificates"]] == [1, 2, 3, 4, 5]
    assert doc["cascade"]["complete"]


def test_holder_negative_control_column(tmp_path, capsys):
    assert main(["holder", "--k-max", "7", "--schedule", "linear", "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    rows = read_csv(tmp_path / "holder_sweep.csv")
    assert list(rows[0]) == ["depth", "seminorm_pow2", "seminorm_linear_negative_control"]
    assert float(rows[-1]["seminorm_linear_negative_control"]) > float(rows[-1]["seminorm_pow2"])
    summary = json.loads((tmp_path / "estimates.json").read_text())
    assert summary["lambda"]["schedule"] == "linear"


def test_graph_sorted(tmp_path, capsys):
    assert main(["graph", "--k-max", "4", "--resolution", "5", "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    rows = read_csv(tmp_path / "graph_f.csv")
    xs = [float(r["x"]) for r in rows]
    assert xs == sorted(xs)
    assert all(float(r["dfdx"]) > 0 for r in rows)


def test_module_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "levels_lab", "params", "--alpha", "0.3"],
        capture_output=True, text=True, cwd=tmp_path,
    )
    assert res.returncode == 0 and json.loads(res.stdout)["passed"]
