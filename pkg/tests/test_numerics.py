import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from applab.exceptions import AccuracyError, DomainError
from applab.numerics import (
    Accuracy,
    extrapolate_limit,
    gamma_ratio,
    gauss_laguerre,
    integrate_halfline,
    log_gamma,
    rising_factorial,
)


@pytest.mark.parametrize(
    "z, expected",
    [(1.0, 0.0), (5.0, math.log(24.0)), (0.5, 0.5723649429247001)],
)
def test_log_gamma_reference_values(z, expected):
    assert log_gamma(z) == pytest.approx(expected, rel=1e-14, abs=1e-15)


@pytest.mark.parametrize("z", [0.0, -1.0, math.inf, math.nan])
def test_log_gamma_rejects_nonpositive(z):
    with pytest.raises(DomainError):
        log_gamma(z)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e4))
def test_log_gamma_matches_mpmath(z):
    ref = float(mpmath.loggamma(mpmath.mpf(z)))
    assert log_gamma(z) == pytest.approx(ref, rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("p, q, expected", [(5, 3, 12.0), (2.5, 2.5, 1.0), (3.5, 1.5, 3.75)])
def test_gamma_ratio_examples(p, q, expected):
    assert gamma_ratio(p, q) == pytest.approx(expected, rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=0.1, max_value=150), st.floats(min_value=0.1, max_value=150))
def test_gamma_ratio_matches_mpmath(p, q):
    ref = float(mpmath.gamma(mpmath.mpf(p)) / mpmath.gamma(mpmath.mpf(q)))
    assert gamma_ratio(p, q) == pytest.approx(ref, rel=1e-11)


def test_gamma_ratio_domain():
    with pytest.raises(DomainError):
        gamma_ratio(0.0, 1.0)


def test_rising_factorial():
    assert rising_factorial(1.5, 0) == 1.0
    assert rising_factorial(1.5, 2) == 3.75
    assert rising_factorial(3.0, 4) == 3 * 4 * 5 * 6


@pytest.mark.parametrize(
    "f, tail, expected",
    [
        (lambda z: np.exp(-z), "exponential", 1.0),
        (lambda z: z * np.exp(-z), "exponential", 1.0),
        (lambda z: 1.0 / (1.0 + z) ** 3, "power", 0.5),
    ],
)
def test_integrate_halfline_examples(f, tail, expected):
    value, err = integrate_halfline(f, tail=tail)
    assert value == pytest.approx(expected, rel=1e-10)
    assert err >= 0


def test_integrate_halfline_nonconvergence_carries_estimate():
    # slowly decaying integrand in the exponential mode cannot reach the tolerance
    with pytest.raises(AccuracyError) as info:
        integrate_halfline(lambda z: 1.0 / (1.0 + z) ** 1.5, Accuracy(1e-12, 0.0, 4))
    assert info.value.estimate is not None


def test_gauss_laguerre_normalized_and_exact_for_polynomials():
    nodes, weights = gauss_laguerre(32)
    assert math.fsum(weights) == pytest.approx(1.0, abs=1e-14)
    # int z^5 e^{-z} = 5!
    assert float(weights @ nodes**5) == pytest.approx(120.0, rel=1e-12)


def test_extrapolate_exact_model():
    fit = extrapolate_limit([(n, 2 + 3 / n) for n in (8, 16, 32, 64)])
    assert fit.estimate == pytest.approx(2.0, abs=1e-12)
    assert fit.slope == pytest.approx(3.0, abs=1e-10)
    assert fit.residual <= 1e-12


def test_extrapolate_constant():
    fit = extrapolate_limit([(n, 7.0) for n in (1, 2, 4, 8)])
    assert fit.estimate == pytest.approx(7.0)
    assert fit.slope == pytest.approx(0.0, abs=1e-12)


def test_extrapolate_with_curvature():
    ns = [2.0**j for j in range(6, 13)]
    fit = extrapolate_limit([(n, 1 + 1 / n + 5 / n**2) for n in ns])
    assert abs(fit.estimate - 1.0) < 1e-3


def test_extrapolate_needs_three_samples():
    with pytest.raises(DomainError):
        extrapolate_limit([(1, 1.0), (2, 1.0)])


def test_accuracy_validation():
    with pytest.raises(DomainError):
        Accuracy(rel_tol=0.0)
    assert Accuracy().target(1e6) == pytest.approx(1e-4)


def test_gamma_ratio_overflow_is_inf():
    assert gamma_ratio(400.0, 0.5) == math.inf
