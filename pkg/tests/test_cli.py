import json

import pytest

from applab.cli import SCHEMAS, describe, main
from applab.config import ConfigError, dump_config, parse_config


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


def read_rows(path):
    lines = path.read_text().splitlines()
    return [line.split(",") for line in lines]


PHILLIPS = {"preset": "phillips"}


def test_describe_schemas(capsys):
    assert main(["describe", "moments"]) == 0
    assert "columns: n, x, r, route, value" in capsys.readouterr().out
    assert "columns: order, x, estimate, slope, residual, paper_value, verdict" in describe("limits")
    assert "columns: theorem, n, x, lhs, rhs, holds, margin" in describe("rates")
    assert main(["describe", "nope"]) == 1


def test_moments_row(tmp_path):
    cfg = write(tmp_path, "m.json", {"operator": PHILLIPS, "grids": {"x": [1], "n": [10]}, "routes": ["oracle"]})
    assert main(["moments", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "moments.csv")
    assert rows[0] == list(SCHEMAS["moments"])
    assert ["10", "1", "2", "oracle", "1.2"] in rows


def test_validate_exit_3(tmp_path, capsys):
    cfg = write(tmp_path, "v.json", {"operator": {"a": [0.5], "b": [0.5]}, "grids": {"x": [0.5]}})
    assert main(["validate", "--config", cfg, "--out", str(tmp_path)]) == 3
    assert "a0^2-b0^2!=0" in capsys.readouterr().err
    assert read_rows(tmp_path / "validate.csv")[1][:2] == ["a0^2-b0^2!=0", ""]


def test_validate_ok(tmp_path):
    cfg = write(tmp_path, "v.json", {"operator": {"a": [1], "b": [0.5]}, "grids": {"x": [0.1, 1, 10], "i_max": 30}})
    assert main(["validate", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "validate.csv")
    assert len(rows) == 1 + 3 + 3 * 31
    assert all(r[-1] == "true" for r in rows[1:])


def test_verify_paper_ledger(tmp_path):
    cfg = write(tmp_path, "p.json", {"operator": PHILLIPS, "grids": {"x": [1], "n": [10]}})
    assert main(["verify-paper", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = {r[0]: r for r in read_rows(tmp_path / "verify-paper.csv")[1:]}
    assert rows["lemma24_lim2"][-1] == "paper_typo_suspected"
    assert rows["lemma24_lim1"][-1] == "agree"
    assert rows["lemma24_lim2"][1] == "inf"
    summary = dict(read_rows(tmp_path / "verify-paper_summary.csv")[1:])
    assert summary["lemma22_m2"] == "paper_typo_suspected"


def test_limits_and_eval(tmp_path):
    cfg = write(tmp_path, "l.json", {"operator": PHILLIPS, "grids": {"x": [1]}, "orders": [2]})
    assert main(["limits", "--config", cfg, "--out", str(tmp_path)]) == 0
    row = read_rows(tmp_path / "limits.csv")[1]
    assert row[0] == "2" and float(row[2]) == pytest.approx(2.0) and row[-1] == "paper_typo_suspected"
    cfg = write(tmp_path, "e.json", {"operator": PHILLIPS, "grids": {"x": [0.5], "n": [4]}, "function": "one",
                                    "output_path": "sub/e.csv"})
    assert main(["eval", "--config", cfg, "--out", str(tmp_path)]) == 0
    row = read_rows(tmp_path / "sub" / "e.csv")[1]
    assert float(row[2]) == pytest.approx(1.0, abs=1e-12)


def test_bound_violation_exit_2(tmp_path):
    cfg = write(tmp_path, "r.json", {
        "operator": PHILLIPS, "grids": {"x": [0.5, 1], "n": [16]},
        "checks": [{"kind": "lipschitz", "function": "sqrt", "M": 0.01}],
    })
    assert main(["rates", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert any(r[5] == "false" for r in read_rows(tmp_path / "rates.csv")[1:])


def test_nonconvergence_exit_4(tmp_path):
    cfg = write(tmp_path, "n.json", {
        "operator": PHILLIPS, "grids": {"x": [1], "n": [16]}, "function": "exp_neg",
        "tolerances": {"quad_rel_tol": 1e-30, "quad_abs_tol": 1e-300},
    })
    assert main(["eval", "--config", cfg, "--out", str(tmp_path)]) == 4


@pytest.mark.parametrize(
    "text, field",
    [
        ('{"operator": {"preset": "phillips"},\n "grids": {"x": [1], "n": [10],}}', "line 2"),
        ('{"operator": {"preset": "nope"}, "grids": {"x": [1], "n": [1]}}', "operator.preset"),
        ('{"operator": {"preset": "phillips"}, "grids": {"x": [], "n": [1]}}', "grids.x"),
        ('{"operator": {"preset": "phillips"}, "grids": {"x": [1]}}', "grids.n"),
        ('{"operator": {"a": [1], "rho": -1}, "grids": {"x": [1], "n": [1]}}', "operator.rho"),
        ('{"operator": {"preset": "phillips"}, "grids": {"x": [1], "n": [1]}, "tolerances": {"rel_tol": 0}}',
         "tolerances.rel_tol"),
        ('{"operator": {"preset": "phillips"}, "grids": {"x": [1], "n": [1]}, "function": "nope"}', "function"),
        ('{"operator": {"preset": "phillips"}, "grids": {"x": [1], "n": [1]}, "experiment": "eval"}', "experiment"),
    ],
)
def test_malformed_config_exit_1(tmp_path, capsys, text, field):
    cfg = write(tmp_path, "bad.json", text)
    assert main(["moments", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert field in capsys.readouterr().err


def test_usage_errors_exit_1(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["moments"])
    assert info.value.code == 1
    assert main(["moments", "--config", str(tmp_path / "missing.json")]) == 1


def test_config_round_trip():
    text = json.dumps({
        "experiment": "rates",
        "operator": {"a": [1, 2], "b": [0.1], "rho": 0.5, "c": 2},
        "grids": {"x": [0.5, 1], "n": [16, 32], "i_max": 20},
        "function": {"piecewise": {"breakpoints": [1], "pieces": [[1, -1], [-1, 1]]}},
        "tolerances": {"rel_tol": 1e-6},
        "checks": [{"kind": "dt", "tau": 0.5}, {"kind": "korovkin", "interval": [0, 2]}],
        "output_path": "out.csv",
    })
    first = parse_config(text)
    second = parse_config(dump_config(first))
    assert first == second
    assert dump_config(second) == dump_config(first)


def test_config_experiment_mismatch():
    with pytest.raises(ConfigError):
        parse_config('{"experiment": "eval", "operator": {"preset": "phillips"}, "grids": {"x": [1], "n": [1]}}',
                     "moments")


RATES_CFG = {
    "operator": {"a": [1, 2], "b": [0.1], "rho": 0.5, "c": 2},
    "grids": {"x": [0.1, 0.5, 1, 2], "n": [16, 32, 64, 128, 256]},
    "checks": [
        {"kind": "lipschitz"},
        {"kind": "local", "function": "sin", "b": 2},
        {"kind": "steklov", "function": "abs_shift1", "a": 2},
        {"kind": "dt", "tau": 0.5},
        {"kind": "weighted", "alpha": 1},
        {"kind": "korovkin"},
    ],
}


@pytest.mark.parametrize(
    "experiment, cfg, name",
    [
        ("rates", RATES_CFG, "rates.csv"),
        ("moments", {"operator": {"a": [1], "b": [0.5], "rho": 2, "c": 1}, "grids": {"x": [0.1, 1, 5], "n": [4, 64]}},
         "moments.csv"),
        ("dbv", {"operator": PHILLIPS, "grids": {"x": [0.5, 1, 2], "n": [64, 256]}}, "dbv.csv"),
    ],
)
def test_deterministic_across_runs_and_threads(tmp_path, experiment, cfg, name):
    path = write(tmp_path, "c.json", cfg)
    outputs = []
    for tag, threads in (("a", "1"), ("b", "1"), ("c", "8")):
        out = tmp_path / tag
        assert main([experiment, "--config", path, "--threads", threads, "--out", str(out)]) == 0
        outputs.append((out / name).read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]


def test_floats_use_17_significant_digits(tmp_path):
    cfg = write(tmp_path, "m.json", {"operator": PHILLIPS, "grids": {"x": [0.3], "n": [7]}, "routes": ["oracle"]})
    main(["moments", "--config", cfg, "--out", str(tmp_path)])
    rows = read_rows(tmp_path / "moments.csv")[1:]
    value = rows[2][4]
    assert float(value) == pytest.approx(0.3**2 + 2 * 0.3 / 7, rel=1e-15)
    assert value == "%.17g" % float(value)
    assert len({len(r) for r in rows}) == 1
