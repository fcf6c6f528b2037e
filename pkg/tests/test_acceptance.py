"""Acceptance suite: one test per criterion, each at its stated tolerance.

The terminal summary prints one PASS/FAIL line per criterion.
"""

import json
import math
import time

import numpy as np
import pytest

from applab.appell import derivatives_at_one, weight_sequence
from applab.cli import main
from applab.functions import function_preset, polynomial
from applab.kernel import kernel_integrals, kernel_raw_moment
from applab.moments import central_moments, limit_estimate, raw_moments
from applab.operator import apply, preset
from applab.rates import (
    dbv_bound_check,
    dt_bound_constant,
    korovkin_check,
    lipschitz_check,
    local_bound_check,
    steklov_bound_check,
    voronovskaja_check,
    weighted_convergence_check,
)

from conftest import MATRIX, matrix_spec, record
from test_moments import phillips_brute_force

NS = (1, 4, 16, 64, 256)
XS = (0.1, 1.0, 5.0)
BOUND_SPECS = {
    "phillips": lambda: preset("phillips"),
    "szasz_paltanea-rho2-c1": lambda: preset("szasz_paltanea", rho=2, c=1),
    "a1_b05-rho1-c0": lambda: matrix_spec("a1_b05", 1.0, 0),
    "a12_b01-rho0.5-c2": lambda: matrix_spec("a12_b01", 0.5, 2),
}


def test_criterion_01_normalization_and_positivity():
    one = function_preset("one")
    worst_mass, worst_s1, negatives = 0.0, 0.0, 0
    for pair, rho, c in MATRIX:
        for n in NS:
            spec = matrix_spec(pair, rho, c, n)
            for x in XS:
                w = weight_sequence(spec.series, n, x)
                total = w.total
                assert 1 - 2e-12 <= total <= 1.0, (pair, rho, c, n, x, total)
                negatives += int(np.sum(w.weights < 0))
                worst_mass = max(worst_mass, 1 - total)
                worst_s1 = max(worst_s1, abs(apply(spec, one, x) - 1.0))
    record(1, f"max 1-sum(w)={worst_mass:.2e}, max |S(1)-1|={worst_s1:.2e}, negative weights={negatives}")
    assert negatives == 0
    assert worst_s1 <= 1e-10


def test_criterion_02_kernel_moments_vs_quadrature():
    start = time.perf_counter()
    worst = 0.0
    indices = np.arange(1, 11)
    for rho in (0.5, 1.0, 2.0):
        for c in (0, 1, 2):
            for n in NS:
                spec = matrix_spec("szasz", rho, c, n)
                for r in range(5):
                    if not n * rho > r * c:
                        continue
                    monomial = polynomial([0.0] * r + [1.0])
                    quad = kernel_integrals(spec.kernel, indices, monomial, growth=r)
                    exact = np.array([kernel_raw_moment(spec.kernel, int(i), r) for i in indices])
                    worst = max(worst, float(np.max(np.abs(quad - exact) / np.abs(exact))))
    elapsed = time.perf_counter() - start
    record(2, f"max rel err={worst:.2e}, runtime={elapsed:.1f}s")
    assert worst <= 1e-8
    assert elapsed < 30.0


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def test_criterion_03_route_equivalence():
    worst_numeric, worst_quad, compared = 0.0, 0.0, 0
    for pair, rho, c in MATRIX:
        for n in NS:
            spec = matrix_spec(pair, rho, c, n)
            for x in XS:
                oracle = raw_moments(spec, x, "oracle").m
                numeric = raw_moments(spec, x, "numeric").m
                quad = raw_moments(spec, x, "quadrature").m
                for r in range(5):
                    if math.isnan(oracle[r]):
                        assert math.isnan(numeric[r]) and math.isnan(quad[r])
                        continue
                    compared += 1
                    worst_numeric = max(worst_numeric, _rel(numeric[r], oracle[r]))
                    worst_quad = max(worst_quad, _rel(quad[r], oracle[r]))
    record(3, f"{compared} moments, oracle/numeric {worst_numeric:.2e}, oracle/quadrature {worst_quad:.2e}")
    assert worst_numeric <= 1e-11
    assert worst_quad <= 1e-7


def test_criterion_04_phillips_oracle():
    worst = 0.0
    for n in (1, 4, 10, 64, 256):
        spec = preset("phillips", n=n)
        for x in (0.1, 0.5, 1.0, 2.0, 5.0):
            m = raw_moments(spec, x).m
            mu2 = central_moments(spec, x).mu2
            brute_m1 = float(phillips_brute_force(n, x, 1))
            brute_m2 = float(phillips_brute_force(n, x, 2))
            brute_mu2 = brute_m2 - 2 * x * brute_m1 + x * x
            worst = max(
                worst,
                _rel(m[1], x),
                _rel(mu2, 2 * x / n),
                _rel(m[1], brute_m1),
                _rel(mu2, brute_mu2),
            )
    record(4, f"max rel err={worst:.2e}")
    assert worst <= 1e-11


def test_criterion_05_first_limit():
    worst = 0.0
    for pair, rho, c in MATRIX:
        spec = matrix_spec(pair, rho, c)
        d = derivatives_at_one(spec.series)
        for x in (0.5, 1.0, 2.0):
            target = c * x / rho + d.A[1] / d.A[0]
            est = limit_estimate(spec, x, 1).estimate
            err = abs(est - target) / max(abs(target), 1e-12) if target else abs(est)
            worst = max(worst, err)
    record(5, f"max rel err={worst:.2e}")
    assert worst <= 1e-3


def test_criterion_06_discrepancy_ledger(tmp_path):
    cfg = tmp_path / "verify.json"
    cfg.write_text(json.dumps({"operator": {"preset": "phillips"}, "grids": {"x": [1.0], "n": [10]}}))
    assert main(["verify-paper", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "verify-paper_summary.csv").read_text().splitlines()[1:]
    verdicts = dict(line.split(",") for line in lines)
    flagged = ["lemma22_m2", "lemma23_mu2", "lemma23_mu4", "lemma24_lim2", "lemma24_lim4", "thm33_rhs"]
    agreeing = sorted(k for k in verdicts if k.startswith("lemma21_")) + ["lemma22_m0", "lemma22_m1", "lemma24_lim1"]
    wrong = [k for k in flagged if verdicts.get(k) != "paper_typo_suspected"]
    wrong += [k for k in agreeing if verdicts.get(k) != "agree"]

    # n mu2 -> x (1 + rho + c x) / rho, derived independently of the printed limit
    worst = 0.0
    phillips = preset("phillips")
    points = [(phillips, 1.0)] + [(matrix_spec(p, r, c), 1.0) for p, r, c in MATRIX]
    for spec, x in points:
        k = spec.kernel
        target = x * (1 + k.rho + k.c * x) / k.rho
        worst = max(worst, _rel(limit_estimate(spec, x, 2).estimate, target))
    record(6, f"verdict mismatches={wrong or 'none'}, n*mu2 limit max rel err={worst:.2e}")
    assert len(agreeing) >= 5
    assert worst <= 5e-3
    assert not wrong


def test_criterion_07_voronovskaja():
    specs = {"phillips": preset("phillips"), "a1_b05-rho2-c1": matrix_spec("a1_b05", 2.0, 1)}
    worst = 0.0
    for spec in specs.values():
        for name in ("exp_neg", "cube"):
            res = voronovskaja_check(spec, function_preset(name), 1.0)
            est, target = res.constants["estimate"], res.constants["target"]
            worst = max(worst, _rel(est, target))
            assert res.holds, (spec.describe(), name, est, target)
    record(7, f"max rel err={worst:.2e}")
    assert worst <= 0.01


def test_criterion_08_korovkin_rate():
    square = function_preset("square")
    lo, hi = math.inf, -math.inf
    failing = []
    for pair, rho, c in MATRIX:
        spec = matrix_spec(pair, rho, c)
        res = korovkin_check(spec, f_set=[square])
        errs = res.constants["sup_errors[square]"]
        ns = sorted(2.0**j for j in range(5, 11))
        for k in range(1, len(ns)):
            if ns[k] >= 64:
                ratio = errs[k] / errs[k - 1]
                lo, hi = min(lo, ratio), max(hi, ratio)
        if not res.holds:
            failing.append((pair, rho, c))
    record(8, f"halving ratios in [{lo:.3f}, {hi:.3f}], failing specs={failing or 'none'}")
    assert not failing
    assert 0.35 <= lo and hi <= 0.65


def _bound_suites(spec):
    square, sin = function_preset("square"), function_preset("sin")
    kink, root = function_preset("abs_shift1"), function_preset("sqrt")
    yield "lipschitz(sqrt)", lipschitz_check(spec, root)
    for b in (2.0, 3.0):
        yield f"local(square,b={b:g})", local_bound_check(spec, square, b)
        yield f"local(sin,b={b:g})", local_bound_check(spec, sin, b)
    yield "steklov(square)", steklov_bound_check(spec, square, 2.0)
    yield "steklov(abs_shift1)", steklov_bound_check(spec, kink, 2.0)
    yield "dbv(abs_shift1)", dbv_bound_check(spec, kink)
    yield "dbv(square)", dbv_bound_check(spec, square)


def test_criterion_09_bound_suites():
    failures = []
    dt_ratios, decay = [], []
    for label, make in BOUND_SPECS.items():
        spec = make()
        for name, res in _bound_suites(spec):
            if not res.holds:
                failures.append(f"{label}:{name}")
        dt = dt_bound_constant(spec, function_preset("exp_neg"), 0.5)
        dt_ratios.append(dt.constants["ratio"])
        if not dt.constants["ratio"] < 2:
            failures.append(f"{label}:dt")
        weighted = weighted_convergence_check(spec, function_preset("square"), 1.0)
        sups = weighted.constants["sups"]
        decay.append(sups[-1] / sups[0])
        strictly = all(b < a for a, b in zip(sups, sups[1:]))
        if not (strictly and sups[-1] < sups[0] / 8 and weighted.holds):
            failures.append(f"{label}:weighted")
    record(
        9,
        f"failures={failures or 'none'}, dt ratio max={max(dt_ratios):.3f}, "
        f"weighted final/initial max={max(decay):.4f}",
    )
    assert not failures


def test_criterion_10_determinism(tmp_path):
    configs = {
        "moments": {"operator": {"a": [1, 2], "b": [0.1], "rho": 0.5, "c": 2},
                    "grids": {"x": [0.1, 1, 5], "n": [4, 64, 256]}},
        "eval": {"operator": {"preset": "phillips"}, "grids": {"x": [0.25, 1, 3], "n": [16, 128]},
                 "function": "abs_shift1"},
        "limits": {"operator": {"a": [1], "b": [0.5], "rho": 2, "c": 1}, "grids": {"x": [0.5, 1, 2]}},
        "verify-paper": {"operator": {"preset": "phillips"}, "grids": {"x": [1], "n": [10]}},
        "rates": {"operator": {"preset": "szasz_paltanea", "rho": 2, "c": 1},
                  "grids": {"x": [0.1, 0.5, 1, 2], "n": [16, 32, 64, 128, 256]}},
        "dbv": {"operator": {"preset": "phillips"}, "grids": {"x": [0.5, 1, 2], "n": [64, 256]}},
    }
    differing = []
    for experiment, body in configs.items():
        path = tmp_path / f"{experiment}.json"
        path.write_text(json.dumps(body))
        outputs = []
        for tag, threads in (("first", "1"), ("second", "1"), ("threaded", "8")):
            out = tmp_path / experiment / tag
            assert main([experiment, "--config", str(path), "--threads", threads, "--out", str(out)]) == 0
            outputs.append(sorted((p.name, p.read_bytes()) for p in out.iterdir()))
        if not outputs[0] == outputs[1] == outputs[2]:
            differing.append(experiment)
    record(10, f"{len(configs)} experiments x 3 runs, differing={differing or 'none'}")
    assert not differing


@pytest.mark.parametrize("criterion", range(1, 11))
def test_every_criterion_has_a_test(criterion):
    assert any(name.startswith(f"test_criterion_{criterion:02d}_") for name in globals())
