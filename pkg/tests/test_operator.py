import math

import numpy as np
import pytest

from applab.appell import PowerSeriesPair
from applab.exceptions import DomainError, ValidationError
from applab.functions import function_preset, polynomial
from applab.kernel import KernelParams
from applab.operator import (
    EvalOptions,
    OperatorSpec,
    apply,
    apply_discrete,
    apply_grid,
    apply_monomial,
    operator_weights,
    preset,
)

from conftest import MATRIX, matrix_spec


@pytest.mark.parametrize("pair, rho, c", MATRIX)
def test_constant_is_reproduced(pair, rho, c):
    one = function_preset("one")
    for n in (1, 16, 256):
        spec = matrix_spec(pair, rho, c, n)
        vals = apply_grid(spec, one, [0.1, 1.0, 5.0])
        np.testing.assert_allclose(vals, 1.0, atol=1e-10)


@pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
def test_phillips_reproduces_identity(x):
    spec = preset("phillips", n=10)
    assert apply(spec, function_preset("identity"), x) == pytest.approx(x, rel=1e-9)


def test_szasz_at_zero_is_point_evaluation():
    f = function_preset("exp_neg")
    assert apply(preset("szasz", n=5), f, 0.0) == 1.0
    assert apply(preset("szasz_paltanea", n=5, rho=2, c=1), f, 0.0) == 1.0


def test_monomial_examples():
    assert apply_monomial(preset("phillips", n=3), 0, 0.7) == pytest.approx(1.0, abs=1e-12)
    sp = preset("szasz_paltanea", n=10, rho=2, c=1)
    assert apply_monomial(sp, 1, 1.0) == pytest.approx(20 / 19, rel=1e-13)
    assert apply_monomial(preset("phillips", n=10), 2, 1.0) == pytest.approx(1.2, rel=1e-13)


def test_monomial_first_moment_two_term_pair():
    n, x, rho, c = 6.0, 1.0, 1.0, 0
    spec = OperatorSpec(PowerSeriesPair((1.0,), (0.5,)), KernelParams(n, rho, c))
    A, Ap, B, Bp = 1.0, 0.0, 0.5, 0.0
    y = n * x
    e, d = math.exp(y), math.exp(-y)
    expected = rho * (y * (A * e - B * d) + Ap * e + Bp * d) / ((n * rho - c) * (A * e + B * d))
    assert apply_monomial(spec, 1, x) == pytest.approx(expected, rel=1e-12)


def test_monomial_quadrature_agreement():
    spec = OperatorSpec(PowerSeriesPair((1.0, 2.0), (0.1,)), KernelParams(16, 0.5, 2))
    for r in range(3):
        quad = apply(spec, polynomial([0.0] * r + [1.0]), 0.8)
        assert quad == pytest.approx(apply_monomial(spec, r, 0.8), rel=1e-7)


def test_monomial_order_validation():
    with pytest.raises(DomainError):
        apply_monomial(preset("phillips"), 5, 1.0)


def test_discrete_operator():
    szasz = preset("szasz", n=7)
    assert apply(szasz, function_preset("one"), 1.3) == pytest.approx(1.0, abs=1e-12)
    assert apply(szasz, function_preset("identity"), 1.3) == pytest.approx(1.3, rel=1e-12)
    assert apply(szasz, function_preset("square"), 1.3) == pytest.approx(1.3**2 + 1.3 / 7, rel=1e-12)


def test_discrete_first_moment_two_term_pair():
    pair = PowerSeriesPair((1.0,), (0.5,))
    n, x = 4.0, 1.0
    y = n * x
    expected = (y * (math.exp(y) - 0.5 * math.exp(-y))) / (n * (math.exp(y) + 0.5 * math.exp(-y)))
    assert apply_discrete(pair, n, function_preset("identity"), x) == pytest.approx(expected, rel=1e-12)


def test_printed_atom_breaks_normalization_for_two_term_pair():
    spec = OperatorSpec(PowerSeriesPair((1.0, 2.0), (0.1,)), KernelParams(4, 1, 0))
    default = apply_monomial(spec, 0, 0.05)
    printed = apply_monomial(spec, 0, 0.05, EvalOptions(printed_atom=True))
    assert default == pytest.approx(1.0, abs=1e-14)
    assert abs(printed - 1.0) > 1e-3
    # the unnormalized atom carries full mass even for the Szasz pair
    w = operator_weights(preset("phillips", n=4), 0.3, EvalOptions(printed_atom=True)).weights[0]
    assert w == 1.0
    assert operator_weights(preset("phillips", n=4), 0.3).weights[0] == pytest.approx(math.exp(-1.2), rel=1e-14)


def test_presets():
    assert preset("szasz").discrete
    ph = preset("phillips", n=3, rho=5, c=2)
    assert (ph.kernel.rho, ph.kernel.c) == (1.0, 0)
    assert preset("a2_family").series.b == (0.5,)
    with pytest.raises(DomainError):
        preset("bernstein")


def test_spec_rejects_invalid_pair():
    with pytest.raises(ValidationError):
        OperatorSpec(PowerSeriesPair((0.5,), (0.5,)), KernelParams(1, 1, 0))


def test_eval_options_validation():
    with pytest.raises(DomainError):
        EvalOptions(weight_eps=1e-3)
