"""Discrete operator T_n and summation-integral operator S_n^rho.

::

    S_n(f; x) = w_0 f(0) + sum_{i>=1} w_i int phi_{n,i}(z) f(z) dz
    T_n(f; x) = sum_{i>=0} w_i f(i / n)

with ``w_i = p_i(nx) / (A(1) e^{nx} + B(1) e^{-nx})``.  The atom weight is
``w_0 = p_0(nx) / (...)``, which keeps ``S_n(1; x) = 1``; the variant
``(a_0 e^{nx} + b_0 e^{-nx}) / (...)`` is available through
``EvalOptions(printed_atom=True)`` for comparison purposes only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .appell import PowerSeriesPair, WeightSequence, derivatives_at_one, full_weights, weight_sequence
from .exceptions import DomainError
from .functions import FunctionHandle
from .kernel import KernelParams, kernel_integrals
from .numerics import Accuracy

__all__ = [
    "OperatorSpec",
    "EvalOptions",
    "PRESETS",
    "preset",
    "operator_weights",
    "apply",
    "apply_grid",
    "apply_monomial",
    "apply_discrete",
]


@dataclass(frozen=True)
class OperatorSpec:
    """One operator: the Appell pair plus kernel parameters ``(n, rho, c)``.

    With ``discrete=True`` this describes ``T_n`` and ``rho``/``c`` are unused.
    """

    series: PowerSeriesPair
    kernel: KernelParams
    discrete: bool = False

    def __post_init__(self):
        self.series.check()

    @property
    def n(self) -> float:
        return self.kernel.n

    def with_n(self, n: float) -> "OperatorSpec":
        return replace(self, kernel=self.kernel.with_n(n))

    def describe(self) -> str:
        kind = "T" if self.discrete else "S"
        return (
            f"{kind}[a={list(self.series.a)}, b={list(self.series.b)}, "
            f"n={self.kernel.n:g}, rho={self.kernel.rho:g}, c={self.kernel.c}]"
        )


@dataclass(frozen=True)
class EvalOptions:
    weight_eps: float = 1e-12
    quad_acc: Accuracy = field(default_factory=Accuracy)
    renormalize: bool = False
    printed_atom: bool = False

    def __post_init__(self):
        if not 0 < self.weight_eps < 1e-6:
            raise DomainError("weight_eps must lie in (0, 1e-6)")


PRESETS = ("szasz", "szasz_paltanea", "phillips", "a2_family")


def preset(
    name: str,
    n: float = 1.0,
    rho: float = 1.0,
    c: int = 0,
    a: Sequence[float] | None = None,
    b: Sequence[float] | None = None,
) -> OperatorSpec:
    """Classical specializations.

    ``szasz`` is the discrete operator with ``A = 1, B = 0``;
    ``szasz_paltanea`` uses the same pair with the given kernel;
    ``phillips`` fixes ``rho = 1, c = 0``;
    ``a2_family`` takes ``a`` and ``b`` (default ``a = (1,), b = (0.5,)``).
    """
    szasz_pair = PowerSeriesPair((1.0,), ())
    if name == "szasz":
        return OperatorSpec(szasz_pair, KernelParams(n, 1.0, 0), discrete=True)
    if name == "szasz_paltanea":
        return OperatorSpec(szasz_pair, KernelParams(n, rho, c))
    if name == "phillips":
        return OperatorSpec(szasz_pair, KernelParams(n, 1.0, 0))
    if name == "a2_family":
        pair = PowerSeriesPair(tuple(a) if a is not None else (1.0,), tuple(b) if b is not None else (0.5,))
        return OperatorSpec(pair, KernelParams(n, rho, c))
    raise DomainError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


def operator_weights(spec: OperatorSpec, x: float, opts: EvalOptions | None = None) -> WeightSequence:
    """Weights used by :func:`apply`, with the atom variant selected by ``opts``."""
    opts = opts or EvalOptions()
    ws = weight_sequence(spec.series, spec.n, x, opts.weight_eps, opts.renormalize)
    if not opts.printed_atom:
        return ws
    table = derivatives_at_one(spec.series)
    d = math.exp(-2.0 * spec.n * x)
    w = ws.weights.copy()
    w[0] = (spec.series.coeff_a(0) + spec.series.coeff_b(0) * d) / (table.A[0] + table.B[0] * d)
    return replace(ws, weights=w)


def _f_at_zero(f: FunctionHandle) -> float:
    return float(np.asarray(f(np.array([0.0])))[0])


def apply_grid(
    spec: OperatorSpec,
    f: FunctionHandle,
    xs: Sequence[float],
    opts: EvalOptions | None = None,
) -> np.ndarray:
    """``S_n(f; x)`` for every ``x`` in ``xs``.

    Kernel integrals do not depend on ``x``, so they are computed once for
    the largest horizon and shared across the grid.
    """
    opts = opts or EvalOptions()
    xs = [float(x) for x in xs]
    if spec.discrete:
        return np.array([apply_discrete(spec.series, spec.n, f, x, opts) for x in xs])
    weights = [operator_weights(spec, x, opts).weights for x in xs]
    horizon = max(len(w) for w in weights) - 1
    integrals = np.zeros(0)
    if horizon >= 1:
        importance = np.zeros(horizon)
        for w in weights:
            importance[: len(w) - 1] = np.maximum(importance[: len(w) - 1], w[1:])
        integrals = kernel_integrals(
            spec.kernel,
            np.arange(1, horizon + 1),
            f,
            opts.quad_acc,
            growth=f.growth_order,
            breakpoints=f.breakpoints,
            importance=importance,
        )
    f0 = _f_at_zero(f)
    out = []
    for w in weights:
        terms = w[1:] * integrals[: len(w) - 1]
        out.append(math.fsum(np.concatenate(([w[0] * f0], terms))))
    return np.array(out)


def apply(spec: OperatorSpec, f: FunctionHandle, x: float, opts: EvalOptions | None = None) -> float:
    """``S_n(f; x)`` (or ``T_n(f; x)`` for a discrete spec)."""
    return float(apply_grid(spec, f, [x], opts)[0])


def apply_monomial(spec: OperatorSpec, r: int, x: float, opts: EvalOptions | None = None) -> float:
    """``S_n(z^r; x)`` as the untruncated series ``sum_i w_i int phi_{n,i} z^r``
    with closed-form kernel moments (no quadrature)."""
    if int(r) != r or not 0 <= r <= 4:
        raise DomainError("monomial order must be an integer in 0..4")
    r = int(r)
    opts = opts or EvalOptions()
    w = full_weights(spec.series, spec.n, x)
    if opts.printed_atom:
        w[0] = operator_weights(spec, x, opts).weights[0]
    if spec.discrete:
        i = np.arange(len(w), dtype=float)
        return math.fsum(w * (i / spec.n) ** r)
    p = spec.kernel
    p.require_moment(r)
    if r == 0:
        return math.fsum(w)
    a = np.arange(1, len(w), dtype=float) * p.rho
    rising = np.ones_like(a)
    for j in range(r):
        rising *= a + j
    denom = 1.0
    for j in range(1, r + 1):
        denom *= p.n_rho - j * p.c
    return math.fsum(w[1:] * rising) / denom


def apply_discrete(
    series: PowerSeriesPair,
    n: float,
    f: FunctionHandle,
    x: float,
    opts: EvalOptions | None = None,
) -> float:
    """``T_n(f; x) = sum_i w_i f(i / n)``.

    Point evaluations are cheap, so the untruncated weights are used unless
    ``opts.renormalize`` asks for the truncated, renormalized sequence.
    """
    opts = opts or EvalOptions()
    if opts.renormalize:
        w = weight_sequence(series, n, x, opts.weight_eps, True).weights
    else:
        w = full_weights(series, n, x)
    nodes = np.arange(len(w), dtype=float) / float(n)
    return math.fsum(w * np.asarray(f(nodes), dtype=float))
