"""Raw and central moments by independent routes, their limits, and diffs
against the transcribed formulas.

Routes
------
``oracle``
    Closed-form factorial sums ``F_k = sum_i (i)_k p_i(nx)`` combined with
    exact Stirling tables::

        m_r = sum_j |s(r,j)| rho^j sum_k S2(j,k) F_k / (F_0 prod_{m<=r} (n rho - m c))

``numeric``
    Direct weighted series ``sum_i w_i int phi_{n,i} z^r`` with closed-form
    kernel moments.
``quadrature``
    The operator applied to ``z^r`` through kernel quadrature.
``published``
    The transcribed formulas of :mod:`applab.published`.
"""

from __future__ import annotations

import math
import warnings
from fractions import Fraction
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .appell import PowerSeriesPair, derivatives_at_one, scaled_basis_terms, weight_cap
from .exceptions import AccuracyError, DomainError, TruncationError
from .functions import FunctionHandle, polynomial
from .numerics import LimitFit, extrapolate_limit
from .operator import EvalOptions, OperatorSpec, apply, apply_monomial
from .published import PUBLISHED_FORMULAS, published_formula

__all__ = [
    "ROUTES",
    "STIRLING1",
    "STIRLING2",
    "FactorialSums",
    "MomentVector",
    "CentralMoments",
    "DiscrepancyReport",
    "MomentWarning",
    "factorial_sums_closed",
    "factorial_sums_numeric",
    "moments_from_factorial_sums",
    "raw_moments",
    "raw_moments_oracle",
    "central_moments",
    "central_from_raw",
    "limit_value",
    "limit_estimate",
    "derived_limit",
    "discrepancy_report",
    "summarize_verdicts",
    "LIMIT_NS",
]

ROUTES = ("oracle", "numeric", "quadrature", "published")

# unsigned Stirling numbers of the first kind |s(r, j)|, r = 0..4
STIRLING1 = ((1,), (0, 1), (0, 1, 1), (0, 2, 3, 1), (0, 6, 11, 6, 1))
# Stirling numbers of the second kind S2(j, k), j = 0..4
STIRLING2 = ((1,), (0, 1), (0, 1, 1), (0, 1, 3, 1), (0, 1, 7, 6, 1))

LIMIT_NS = tuple(2.0**j for j in range(8, 17))


class MomentWarning(UserWarning):
    """Loss of significance in a central moment."""


@dataclass(frozen=True)
class FactorialSums:
    """``F[k] * exp(-nx)``; the true sums are ``F[k] * exp(log_scale)``."""

    F: tuple
    n: float
    x: float

    @property
    def log_scale(self) -> float:
        return self.n * self.x

    def ratio(self, k: int) -> float:
        return self.F[k] / self.F[0]


@dataclass(frozen=True)
class MomentVector:
    m: tuple
    route: str
    n: float
    x: float


@dataclass(frozen=True)
class CentralMoments:
    mu1: float
    mu2: float
    mu4: float

    @property
    def varrho(self) -> float:
        return self.mu2


@dataclass(frozen=True)
class DiscrepancyReport:
    quantity: str
    n: float
    x: float
    oracle: float
    published: float
    abs_diff: float
    rel_diff: float
    verdict: str
    context: str = ""

    def row(self) -> tuple:
        n = "inf" if math.isinf(self.n) else self.n
        return (self.quantity, n, self.x, self.oracle, self.published, self.abs_diff, self.rel_diff, self.verdict)


def factorial_sums_closed(series: PowerSeriesPair, n: float, x: float) -> FactorialSums:
    """Closed form ``F_k = sum_j C(k,j) [A^(k-j)(1) y^j e^y + B^(k-j)(1) (-y)^j e^-y]``, scaled by ``e^-y``."""
    t = derivatives_at_one(series)
    y = float(n) * float(x)
    d = math.exp(-2.0 * y)
    out = []
    for k in range(5):
        terms = []
        for j in range(k + 1):
            coef = math.comb(k, j)
            terms.append(coef * t.A[k - j] * y**j)
            terms.append(coef * t.B[k - j] * (-y) ** j * d)
        out.append(math.fsum(terms))
    return FactorialSums(tuple(out), float(n), float(x))


def factorial_sums_numeric(
    series: PowerSeriesPair, n: float, x: float, eps: float = 1e-15
) -> FactorialSums:
    """Brute-force ``sum_i (i)_k e^{-y} p_i(y)`` until the tail is below ``eps`` (relative)."""
    y = float(n) * float(x)
    cap = weight_cap(series, y) + 64
    terms = scaled_basis_terms(series, y, cap)
    i = np.arange(cap, dtype=float)
    out = []
    for k in range(5):
        falling = np.ones(cap)
        for j in range(k):
            falling *= i - j
        vals = falling * terms
        total = math.fsum(vals)
        tail = math.fsum(np.abs(vals[-16:]))
        if tail > eps * max(abs(total), 1e-300) and total != 0.0:
            raise TruncationError(f"factorial sum of order {k} not converged at horizon {cap}")
        out.append(total)
    return FactorialSums(tuple(out), float(n), float(x))


def _rising_over_poles(spec: OperatorSpec, r: int) -> float:
    p = spec.kernel
    p.require_moment(r)
    denom = 1.0
    for m in range(1, r + 1):
        denom *= p.n_rho - m * p.c
    return denom


def moments_from_factorial_sums(spec: OperatorSpec, fs: FactorialSums) -> tuple:
    """Raw moments ``m_0..m_4`` from factorial sums (integral or discrete operator)."""
    F = fs.F
    out = [1.0]
    for r in range(1, 5):
        if spec.discrete:
            num = math.fsum(STIRLING2[r][k] * F[k] for k in range(r + 1))
            out.append(num / (F[0] * spec.n**r))
            continue
        if not spec.kernel.moment_exists(r):
            out.append(math.nan)
            continue
        rho = spec.kernel.rho
        inner = []
        for j in range(r + 1):
            s = STIRLING1[r][j]
            if s == 0:
                continue
            power_sum = math.fsum(STIRLING2[j][k] * F[k] for k in range(j + 1))
            inner.append(s * rho**j * power_sum)
        out.append(math.fsum(inner) / (F[0] * _rising_over_poles(spec, r)))
    return tuple(out)


def _oracle_exact(spec: OperatorSpec, x: float) -> list:
    """Oracle moments as exact rationals of the (float) inputs.

    Working in rational arithmetic removes the cancellation in the
    binomial expansion of the central moments, which otherwise costs about
    ``log10(n^2)`` digits in ``mu4``.  ``None`` marks divergent orders.
    """
    t = derivatives_at_one(spec.series)
    A = [Fraction(v) for v in t.A]
    B = [Fraction(v) for v in t.B]
    y = Fraction(spec.n) * Fraction(float(x))
    d = Fraction(math.exp(-2.0 * float(y)))
    F = []
    for k in range(5):
        F.append(sum(math.comb(k, j) * (A[k - j] * y**j + B[k - j] * (-y) ** j * d) for j in range(k + 1)))
    n = Fraction(spec.n)
    out = [Fraction(1)]
    for r in range(1, 5):
        if spec.discrete:
            out.append(sum(STIRLING2[r][k] * F[k] for k in range(r + 1)) / (F[0] * n**r))
            continue
        if not spec.kernel.moment_exists(r):
            out.append(None)
            continue
        rho = Fraction(spec.kernel.rho)
        N = n * rho
        num = sum(
            STIRLING1[r][j] * rho**j * sum(STIRLING2[j][k] * F[k] for k in range(j + 1))
            for j in range(r + 1)
        )
        den = F[0]
        for m in range(1, r + 1):
            den *= N - m * spec.kernel.c
        out.append(num / den)
    return out


def raw_moments_oracle(spec: OperatorSpec, x: float) -> MomentVector:
    """Oracle moments; orders whose kernel moment diverges are ``nan``."""
    exact = _oracle_exact(spec, x)
    vals = tuple(math.nan if v is None else float(v) for v in exact)
    return MomentVector(vals, "oracle", spec.n, float(x))


def raw_moments(
    spec: OperatorSpec, x: float, route: str = "oracle", opts: EvalOptions | None = None
) -> MomentVector:
    """Moments ``m_0..m_4`` by the chosen route (``nan`` where undefined)."""
    if route == "oracle":
        return raw_moments_oracle(spec, x)
    if route == "numeric":
        vals = []
        for r in range(5):
            ok = spec.discrete or spec.kernel.moment_exists(r)
            vals.append(apply_monomial(spec, r, x, opts) if ok else math.nan)
        return MomentVector(tuple(vals), route, spec.n, float(x))
    if route == "quadrature":
        vals = []
        for r in range(5):
            ok = spec.discrete or spec.kernel.moment_exists(r)
            vals.append(apply(spec, polynomial([0.0] * r + [1.0]), x, opts) if ok else math.nan)
        return MomentVector(tuple(vals), route, spec.n, float(x))
    if route == "published":
        prefix = "lemma21_m" if spec.discrete else "lemma22_m"
        vals = []
        for r in range(5):
            ok = spec.discrete or spec.kernel.moment_exists(r)
            vals.append(published_formula(f"{prefix}{r}", spec, x) if ok else math.nan)
        return MomentVector(tuple(vals), route, spec.n, float(x))
    raise DomainError(f"unknown route {route!r}; choose from {', '.join(ROUTES)}")


def central_from_raw(m: Sequence[float], x: float) -> CentralMoments:
    x = float(x)
    mu1 = m[1] - x
    mu2 = math.fsum([m[2], -2 * x * m[1], x * x])
    mu4 = math.fsum([m[4], -4 * x * m[3], 6 * x**2 * m[2], -4 * x**3 * m[1], x**4])
    if math.isfinite(mu4) and abs(mu4) < 1e-12 * abs(m[4]):
        warnings.warn(
            f"fourth central moment {mu4:.3e} is below 1e-12 of m4={m[4]:.3e}; "
            "only a few significant digits survive",
            MomentWarning,
            stacklevel=3,
        )
    return CentralMoments(mu1, mu2, mu4)


def central_moments(
    spec: OperatorSpec, x: float, route: str = "oracle", opts: EvalOptions | None = None
) -> CentralMoments:
    """Central moments from the route's raw moments (fourth order needs ``n rho > 4c``)."""
    if route == "published" and not spec.discrete:
        return CentralMoments(
            published_formula("lemma23_mu1", spec, x),
            published_formula("lemma23_mu2", spec, x),
            published_formula("lemma23_mu4", spec, x),
        )
    if not spec.discrete:
        spec.kernel.require_moment(2)
    if route == "oracle":
        m = _oracle_exact(spec, x)
        X = Fraction(float(x))
        mu1 = m[1] - X
        mu2 = m[2] - 2 * X * m[1] + X * X
        mu4 = math.nan
        if m[4] is not None:
            mu4 = float(m[4] - 4 * X * m[3] + 6 * X**2 * m[2] - 4 * X**3 * m[1] + X**4)
        return CentralMoments(float(mu1), float(mu2), mu4)
    vec = raw_moments(spec, x, route, opts)
    return central_from_raw(vec.m, x)


_LIMIT_POWER = {1: 1, 2: 1, 4: 2}


def limit_value(spec: OperatorSpec, x: float, order: int) -> float:
    """``n^k mu_order`` at the operator's own ``n`` (``k = 2`` for order 4, else 1)."""
    if order not in _LIMIT_POWER:
        raise DomainError("order must be 1, 2 or 4")
    cm = central_moments(spec, x)
    mu = {1: cm.mu1, 2: cm.mu2, 4: cm.mu4}[order]
    return spec.n ** _LIMIT_POWER[order] * mu


def limit_estimate(
    spec: OperatorSpec,
    x: float,
    order: int,
    ns: Sequence[float] = LIMIT_NS,
    max_residual: float = 1e-4,
) -> LimitFit:
    """Extrapolate ``n^k mu_order(x)`` over ``ns`` (default ``2^8..2^16``) to ``n -> inf``."""
    if not x > 0:
        raise DomainError("limit_estimate needs x > 0")
    samples = [(n, limit_value(spec.with_n(n), x, order)) for n in ns]
    fit = extrapolate_limit(samples)
    if fit.residual > max_residual * max(1.0, abs(fit.estimate)):
        raise AccuracyError(
            f"limit fit residual {fit.residual:.3e} too large (order {order}, x={x})",
            estimate=fit.estimate,
            error=fit.residual,
        )
    return fit


def derived_limit(spec: OperatorSpec, x: float, order: int) -> float:
    """Closed-form limits obtained by expanding the oracle moments in ``1/n``.

    ``n mu1 -> c x / rho + A'(1)/A(1)``,
    ``n mu2 -> x (1 + rho + c x) / rho``,
    ``n^2 mu4 -> 3 (x (1 + rho + c x) / rho)^2``.
    """
    t = derivatives_at_one(spec.series)
    rho, c = spec.kernel.rho, spec.kernel.c
    var = x * (1.0 + rho + c * x) / rho
    if order == 1:
        return c * x / rho + t.A[1] / t.A[0]
    if order == 2:
        return var
    if order == 4:
        return 3.0 * var * var
    raise DomainError("order must be 1, 2 or 4")


def _verdict(oracle: float, published: float, rel_tol: float, abs_tol: float) -> tuple:
    diff = abs(oracle - published)
    scale = max(abs(oracle), abs(published))
    rel = diff / scale if scale > 0 else 0.0
    ok = diff <= max(rel_tol * scale, abs_tol)
    return diff, rel, ("agree" if ok else "paper_typo_suspected")


_MOMENT_KEYS = {f"lemma21_m{r}": ("discrete", r) for r in range(5)}
_MOMENT_KEYS.update({f"lemma22_m{r}": ("integral", r) for r in range(5)})
_CENTRAL_KEYS = {"lemma23_mu1": "mu1", "lemma23_mu2": "mu2", "lemma23_mu4": "mu4"}
_LIMIT_KEYS = {"lemma24_lim1": 1, "lemma24_lim2": 2, "lemma24_lim4": 4}


def discrepancy_report(
    spec: OperatorSpec,
    x_grid: Sequence[float],
    n_grid: Sequence[float] | None = None,
    quantities: Sequence[str] = PUBLISHED_FORMULAS,
    test_function: FunctionHandle | None = None,
    rel_tol: float = 1e-6,
    abs_tol: float = 1e-12,
    limit_rel_tol: float = 1e-4,
    limit_abs_tol: float = 1e-6,
) -> list[DiscrepancyReport]:
    """Compare each transcribed formula with its oracle counterpart.

    Finite-``n`` quantities are compared at every ``(n, x)``; limits and the
    asymptotic right-hand side are compared once per ``x`` (reported with
    ``n = inf``) against extrapolated oracle limits.  The asymptotic formula
    uses ``test_function`` (default ``z^2``), which must declare ``f'``, ``f''``.
    """
    ns = [spec.n] if n_grid is None else [float(n) for n in n_grid]
    f = test_function or polynomial([0.0, 0.0, 1.0], name="square")
    out = []
    limit_cache: dict = {}

    def limit(x, order):
        key = (x, order)
        if key not in limit_cache:
            limit_cache[key] = limit_estimate(spec, x, order).estimate
        return limit_cache[key]

    for name in quantities:
        if name not in PUBLISHED_FORMULAS:
            raise DomainError(f"unknown formula {name!r}")
        for x in x_grid:
            x = float(x)
            if name in _LIMIT_KEYS or name == "thm33_rhs":
                if name == "thm33_rhs":
                    f1, f2 = float(f.d1(x)), float(f.d2(x))
                    oracle = limit(x, 1) * f1 + limit(x, 2) * f2 / 2.0
                    pub = published_formula(name, spec, x, f1, f2)
                else:
                    oracle = limit(x, _LIMIT_KEYS[name])
                    pub = published_formula(name, spec, x)
                diff, rel, verdict = _verdict(oracle, pub, limit_rel_tol, limit_abs_tol)
                out.append(DiscrepancyReport(name, math.inf, x, oracle, pub, diff, rel, verdict, spec.describe()))
                continue
            for n in ns:
                s = spec.with_n(n)
                if name in _MOMENT_KEYS:
                    kind, r = _MOMENT_KEYS[name]
                    target = OperatorSpec(s.series, s.kernel, discrete=(kind == "discrete"))
                    if not target.discrete and not target.kernel.moment_exists(r):
                        continue
                    oracle = raw_moments_oracle(target, x).m[r]
                    pub = published_formula(name, target, x)
                else:
                    if not s.kernel.moment_exists(4 if name == "lemma23_mu4" else 2):
                        continue
                    cm = central_moments(s, x)
                    oracle = getattr(cm, _CENTRAL_KEYS[name])
                    pub = published_formula(name, s, x)
                diff, rel, verdict = _verdict(oracle, pub, rel_tol, abs_tol)
                out.append(DiscrepancyReport(name, n, x, oracle, pub, diff, rel, verdict, s.describe()))
    return out


def summarize_verdicts(reports: Sequence[DiscrepancyReport]) -> dict:
    """Per-quantity verdict: ``agree`` if every point agrees, ``paper_typo_suspected``
    if every point disagrees, ``mixed`` otherwise."""
    seen: dict = {}
    for rep in reports:
        seen.setdefault(rep.quantity, []).append(rep.verdict == "agree")
    out = {}
    for name, flags in seen.items():
        if all(flags):
            out[name] = "agree"
        elif not any(flags):
            out[name] = "paper_typo_suspected"
        else:
            out[name] = "mixed"
    return out
