"""Appell polynomials of class A^2 and the normalized operator weights.

The generating function is ``A(t) exp(x t) + B(t) exp(-x t) = sum_i p_i(x) t^i``
with ``A(t) = sum a_i t^i / i!`` and ``B(t) = sum b_i t^i / i!``; both series
are finite (polynomial ``A`` and ``B``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .exceptions import DomainError, PositivityError, TruncationError, ValidationError

__all__ = [
    "PowerSeriesPair",
    "DerivativeTable",
    "WeightSequence",
    "ValidationReport",
    "derivatives_at_one",
    "appell_value",
    "poisson_terms",
    "scaled_basis_terms",
    "weight_cap",
    "weight_sequence",
    "full_weights",
    "validate",
]


@dataclass(frozen=True)
class PowerSeriesPair:
    """Coefficients ``a`` and ``b`` of ``A`` and ``B`` (factorial convention).

    Construction only checks structure; the admissibility constraints are
    reported by :func:`validate` and enforced by :meth:`check`.
    """

    a: tuple = (1.0,)
    b: tuple = ()

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        b = tuple(float(v) for v in self.b)
        if not a:
            raise DomainError("coefficient list a must be nonempty")
        if not all(math.isfinite(v) for v in a + b):
            raise DomainError("coefficients must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self) -> int:
        """Number of coefficient slots ``J`` (longest of the two lists)."""
        return max(len(self.a), len(self.b))

    def coeff_a(self, i: int) -> float:
        return self.a[i] if 0 <= i < len(self.a) else 0.0

    def coeff_b(self, i: int) -> float:
        return self.b[i] if 0 <= i < len(self.b) else 0.0

    def constraint_flags(self) -> list[tuple[str, bool, str]]:
        table = derivatives_at_one(self)
        a0, b0 = self.coeff_a(0), self.coeff_b(0)
        lead = a0 * a0 - b0 * b0
        return [
            ("a0^2-b0^2!=0", lead != 0.0, f"a0^2-b0^2 = {lead!r}"),
            ("A(1)>0", table.A[0] > 0.0, f"A(1) = {table.A[0]!r}"),
            ("B(1)>=0", table.B[0] >= 0.0, f"B(1) = {table.B[0]!r}"),
        ]

    def check(self) -> "PowerSeriesPair":
        """Raise :class:`ValidationError` if a structural constraint fails."""
        bad = [detail for _, ok, detail in self.constraint_flags() if not ok]
        if bad:
            raise ValidationError("invalid power-series pair: " + "; ".join(bad))
        return self


@dataclass(frozen=True)
class DerivativeTable:
    """``A^(k)(1)`` and ``B^(k)(1)`` for ``k = 0..4``."""

    A: tuple
    B: tuple

    def ratio(self, k: int) -> float:
        """``A^(k)(1) / A(1)``."""
        return self.A[k] / self.A[0]


@dataclass(frozen=True)
class WeightSequence:
    """Normalized weights ``w_i = p_i(nx) / (A(1) e^{nx} + B(1) e^{-nx})``.

    ``weights[0]`` multiplies ``f(0)`` in the integral operator.
    """

    x: float
    n: float
    weights: np.ndarray = field(repr=False)
    truncation_mass: float
    horizon: int
    scaled_terms: np.ndarray = field(repr=False, default=None)

    @property
    def total(self) -> float:
        return math.fsum(self.weights)


@dataclass(frozen=True)
class ValidationReport:
    positivity_violations: list
    constraint_flags: list
    sampled_grid: str

    @property
    def ok(self) -> bool:
        return not self.positivity_violations and all(ok for _, ok, _ in self.constraint_flags)


def _series_derivatives(coeffs: Sequence[float], kmax: int = 4) -> tuple:
    out = []
    for k in range(kmax + 1):
        total = Fraction(0)
        for i in range(k, len(coeffs)):
            total += Fraction(coeffs[i]) / math.factorial(i - k)
        out.append(float(total))
    return tuple(out)


def derivatives_at_one(series: PowerSeriesPair) -> DerivativeTable:
    """Exact ``sum_{i>=k} c_i / (i-k)!`` for ``k = 0..4`` (rational arithmetic)."""
    return DerivativeTable(_series_derivatives(series.a), _series_derivatives(series.b))


def appell_value(series: PowerSeriesPair, i: int, x: float) -> float:
    """Evaluate ``p_i(x)`` by its finite expansion."""
    if i < 0:
        raise DomainError("index must be nonnegative")
    terms = []
    lo = max(0, i - series.length + 1)
    for k in range(lo, i + 1):
        j = i - k
        xk = x**k / (math.factorial(j) * math.factorial(k))
        terms.append(series.coeff_a(j) * xk)
        terms.append(series.coeff_b(j) * (-1) ** k * xk)
    return math.fsum(terms)


def _stirlerr(k: np.ndarray) -> np.ndarray:
    """``lgamma(k+1) - (k+1/2) log k + k - log(2 pi)/2`` for ``k >= 1`` without cancellation."""
    out = np.empty_like(k)
    small = k <= 15
    ks = k[small]
    out[small] = gammaln(ks + 1.0) - (ks + 0.5) * np.log(ks) + ks - 0.5 * math.log(2 * math.pi)
    kb = k[~small]
    inv2 = 1.0 / (kb * kb)
    out[~small] = (1 / 12 - inv2 * (1 / 360 - inv2 * (1 / 1260 - inv2 * (1 / 1680 - inv2 / 1188)))) / kb
    return out


def poisson_terms(y: float, count: int) -> np.ndarray:
    """``exp(-y) y^k / k!`` for ``k = 0..count-1``.

    Uses the saddle-point form ``exp(-stirlerr(k) - bd0(k, y)) / sqrt(2 pi k)``
    with ``bd0 = k log(k/y) - k + y``; the naive log-space exponent cancels
    terms of size ``k log y`` and loses ~1e-12 relative accuracy once ``y``
    is in the thousands.
    """
    out = np.zeros(count)
    if y == 0.0:
        out[0] = 1.0
        return out
    out[0] = math.exp(-y)
    k = np.arange(1, count, dtype=float)
    if y < 1.0:
        # small exponents: the direct form has nothing to cancel
        out[1:] = np.exp(-y + k * math.log(y) - gammaln(k + 1.0))
        return out
    u = (k - y) / y
    bd0 = y * ((k / y) * np.log1p(u) - u)
    out[1:] = np.exp(-_stirlerr(k) - bd0) / np.sqrt(2 * math.pi * k)
    return out


def scaled_basis_terms(series: PowerSeriesPair, y: float, count: int) -> np.ndarray:
    """``exp(-y) p_i(y)`` for ``i = 0..count-1`` without forming ``exp(y)``.

    The ``B`` part enters through ``(-1)^k`` times the same Poisson terms,
    which keeps its alternating structure exact.
    """
    pi = poisson_terms(y, count)
    signed = pi * np.where(np.arange(count) % 2 == 0, 1.0, -1.0)
    out = np.zeros(count)
    for j in range(series.length):
        scale = 1.0 / math.factorial(j)
        aj = series.coeff_a(j) * scale
        bj = series.coeff_b(j) * scale
        if aj:
            out[j:] += aj * pi[: count - j]
        if bj:
            out[j:] += bj * signed[: count - j]
    return out


def weight_cap(series: PowerSeriesPair, y: float) -> int:
    """Largest admissible horizon for argument ``y = n x``."""
    return max(64, math.ceil(y + 12.0 * math.sqrt(y)) + series.length)


def weight_sequence(
    series: PowerSeriesPair,
    n: float,
    x: float,
    eps: float = 1e-12,
    renormalize: bool = False,
) -> WeightSequence:
    """Weights of the operator at ``(n, x)`` truncated once the tail mass is below ``eps``."""
    if not n > 0:
        raise DomainError("n must be positive")
    if not x >= 0:
        raise DomainError("x must be nonnegative")
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    y = float(n) * float(x)
    table = derivatives_at_one(series)
    cap = weight_cap(series, y)
    terms = scaled_basis_terms(series, y, cap + 1)
    denom = table.A[0] + table.B[0] * math.exp(-2.0 * y)
    w = terms / denom
    negative = np.flatnonzero(w < 0.0)
    if negative.size:
        i = int(negative[0])
        raise PositivityError(i, x, float(w[i]))
    # suffix sums: 1 - cumsum loses ~1e-13 to rounding over thousands of terms
    outside = max(0.0, 1.0 - math.fsum(w))
    tail = np.append(np.cumsum(w[::-1])[::-1][1:], 0.0) + outside
    reached = np.flatnonzero(tail <= eps)
    if reached.size == 0:
        raise TruncationError(
            f"tail mass {tail[-1]:.3e} exceeds eps={eps:g} at the horizon cap {cap} (n={n}, x={x})"
        )
    horizon = int(reached[0])
    w = w[: horizon + 1]
    total = math.fsum(w)
    mass = max(0.0, 1.0 - total)
    if renormalize:
        w = w / total
    return WeightSequence(
        x=float(x),
        n=float(n),
        weights=w,
        truncation_mass=mass,
        horizon=horizon,
        scaled_terms=terms[: horizon + 1],
    )


def full_weights(series: PowerSeriesPair, n: float, x: float) -> np.ndarray:
    """Untruncated weights up to the horizon cap plus a margin.

    Beyond the cap the Poisson-type mass is below ``exp(-60)``, so sums of
    these weights against polynomially growing sequences are exact to
    rounding.
    """
    if not n > 0:
        raise DomainError("n must be positive")
    if not x >= 0:
        raise DomainError("x must be nonnegative")
    y = float(n) * float(x)
    table = derivatives_at_one(series)
    terms = scaled_basis_terms(series, y, weight_cap(series, y) + 64)
    w = terms / (table.A[0] + table.B[0] * math.exp(-2.0 * y))
    negative = np.flatnonzero(w < 0.0)
    if negative.size:
        i = int(negative[0])
        raise PositivityError(i, x, float(w[i]))
    return w


def validate(series: PowerSeriesPair, x_grid: Sequence[float], i_max: int) -> ValidationReport:
    """Report every violated constraint, including ``p_i(x) <= 0`` on the grid."""
    violations = []
    for x in x_grid:
        for i in range(int(i_max) + 1):
            p = appell_value(series, i, float(x))
            if not p > 0.0:
                violations.append((i, float(x), p))
    grid_desc = f"x in {sorted(float(x) for x in x_grid)}, i = 0..{int(i_max)}"
    return ValidationReport(violations, series.constraint_flags(), grid_desc)
