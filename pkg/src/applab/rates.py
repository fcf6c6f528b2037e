"""Moduli of smoothness and empirical checks of the convergence-rate bounds.

Every modulus is a supremum over a fixed-step grid, so it is a lower bound
of the true modulus and is nondecreasing in its step argument (larger
arguments only add lags).  Bound checks whose right side contains a
modulus halve the grid step up to four times before reporting a violation.

Theorem labels used in results:

* ``thm31_upper`` / ``thm31_lower``  Korovkin O(1/n) halving ratio
* ``thm32``  Lipschitz-type bound
* ``thm33``  asymptotic (Voronovskaja-type) limit
* ``thm34``  local modulus bound
* ``dt_3_5``  Ditzian-Totik constant stabilization
* ``steklov_3_5``  second-modulus (Steklov) bound
* ``thm41_sup`` / ``thm41_decay``  weighted convergence; ``thm42_ratio`` is report-only
* ``thm51``  derivative-of-bounded-variation bound
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exceptions import AccuracyError, DomainError
from .functions import FunctionHandle
from .moments import central_moments, derived_limit, limit_estimate
from .numerics import extrapolate_limit, gauss_legendre
from .operator import EvalOptions, OperatorSpec, apply_grid, apply_monomial
from .published import published_formula

__all__ = [
    "ModulusEstimate",
    "BoundRow",
    "BoundCheckResult",
    "DEFAULT_X_GRID",
    "DEFAULT_N_GRID",
    "modulus1",
    "modulus2",
    "weighted_modulus",
    "dt_modulus",
    "steklov_mean",
    "zhuk_check",
    "operator_values",
    "varrho",
    "korovkin_check",
    "lipschitz_check",
    "voronovskaja_check",
    "local_bound_check",
    "dt_bound_constant",
    "steklov_bound_check",
    "weighted_convergence_check",
    "dbv_bound_check",
]

DEFAULT_X_GRID = (0.1, 0.25, 0.5, 1.0, 2.0, 4.0)
DEFAULT_N_GRID = tuple(2.0**j for j in range(4, 11))
_HOLD_SLACK = 1e-12
_REFINEMENTS = 4


@dataclass(frozen=True)
class ModulusEstimate:
    kind: str
    delta: float
    value: float
    grid_step: float
    interval: tuple


@dataclass(frozen=True)
class BoundRow:
    theorem: str
    n: float
    x: float
    lhs: float
    rhs: float
    asserted: bool = True

    @property
    def holds(self) -> bool:
        return bool(self.lhs <= self.rhs + _HOLD_SLACK)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


@dataclass
class BoundCheckResult:
    theorem: str
    rows: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return all(r.holds for r in self.rows if r.asserted)

    @property
    def margin(self) -> float:
        vals = [r.margin for r in self.rows if r.asserted]
        return min(vals) if vals else math.inf

    def failures(self) -> list:
        return [r for r in self.rows if r.asserted and not r.holds]


# --------------------------------------------------------------------------
# moduli


def _grid(lo: float, hi: float, step: float) -> tuple[np.ndarray, float]:
    if not hi > lo:
        raise DomainError("interval must have hi > lo")
    count = max(1, math.ceil((hi - lo) / step - 1e-9))
    return np.linspace(lo, hi, count + 1), (hi - lo) / count


def _lags(delta: float, step: float) -> int:
    return int(math.floor(delta / step + 1e-9))


def modulus1(f: Callable, delta: float, interval: tuple, grid_step: float | None = None) -> ModulusEstimate:
    """``sup |f(s) - f(t)|`` over grid pairs with ``|s - t| <= delta``."""
    if not delta > 0:
        raise DomainError("delta must be positive")
    step = delta / 64 if grid_step is None else float(grid_step)
    if step > delta / 8 * (1 + 1e-12):
        raise DomainError("grid_step must be at most delta/8")
    pts, step = _grid(interval[0], interval[1], step)
    vals = np.asarray(f(pts), dtype=float)
    best = 0.0
    for lag in range(1, min(_lags(delta, step), len(pts) - 1) + 1):
        best = max(best, float(np.max(np.abs(vals[lag:] - vals[:-lag]))))
    return ModulusEstimate("omega1", float(delta), best, step, tuple(interval))


def modulus2(f: Callable, h: float, interval: tuple, grid_step: float | None = None) -> ModulusEstimate:
    """``sup_{0 < s <= h} |f(t + 2s) - 2 f(t + s) + f(t)|`` on grid points of ``interval``."""
    if not h > 0:
        raise DomainError("h must be positive")
    step = h / 64 if grid_step is None else float(grid_step)
    pts, step = _grid(interval[0], interval[1], step)
    vals = np.asarray(f(pts), dtype=float)
    best = 0.0
    for lag in range(1, _lags(h, step) + 1):
        if 2 * lag >= len(pts):
            break
        diff = vals[2 * lag:] - 2 * vals[lag:-lag] + vals[: -2 * lag]
        best = max(best, float(np.max(np.abs(diff))))
    return ModulusEstimate("omega2", float(h), best, step, tuple(interval))


def weighted_modulus(f: Callable, delta: float, x_max: float, grid_step: float | None = None) -> ModulusEstimate:
    """``sup |f(x + h) - f(x)| / (1 + (x + h)^2)`` over ``x in [0, x_max]``, ``0 < h <= delta``."""
    if not delta > 0:
        raise DomainError("delta must be positive")
    step = delta / 64 if grid_step is None else float(grid_step)
    pts, step = _grid(0.0, x_max + delta, step)
    vals = np.asarray(f(pts), dtype=float)
    base = pts <= x_max + 1e-12
    best = 0.0
    for lag in range(1, _lags(delta, step) + 1):
        num = np.abs(vals[lag:] - vals[:-lag]) / (1.0 + pts[lag:] ** 2)
        num = num[base[:-lag]]
        if num.size:
            best = max(best, float(np.max(num)))
    return ModulusEstimate("omega_weighted", float(delta), best, step, (0.0, float(x_max)))


def _psi(x):
    return np.sqrt(x * (1.0 + x))


def dt_modulus(
    f: Callable,
    t: float,
    tau: float,
    x_max: float = 20.0,
    x_step: float = 0.01,
    h_step: float | None = None,
) -> ModulusEstimate:
    """Ditzian-Totik modulus with step weight ``psi(x)^tau``, ``psi(x)^2 = x (1 + x)``.

    ``h`` runs over multiples of ``h_step`` (default ``t/32``) up to ``t``;
    ``x`` over a grid on ``[0, x_max]`` with both ``x +- h psi^tau / 2 >= 0``.
    """
    if not 0 <= tau <= 1:
        raise DomainError("tau must lie in [0, 1]")
    if not t > 0:
        raise DomainError("t must be positive")
    step = t / 32 if h_step is None else float(h_step)
    xs, _ = _grid(0.0, x_max, x_step)
    weight = _psi(xs) ** tau if tau > 0 else np.ones_like(xs)
    best = 0.0
    for j in range(1, _lags(t, step) + 1):
        half = 0.5 * j * step * weight
        ok = xs - half >= 0.0
        if not np.any(ok):
            continue
        diff = np.asarray(f(xs[ok] + half[ok]), dtype=float) - np.asarray(f(xs[ok] - half[ok]), dtype=float)
        best = max(best, float(np.max(np.abs(diff))))
    return ModulusEstimate("omega_dt", float(t), best, step, (0.0, float(x_max)))


# --------------------------------------------------------------------------
# Steklov mean


def _edge_line(f: Callable, lo: float, hi: float) -> np.polynomial.Polynomial:
    xs = np.linspace(lo, hi, 65)
    return np.polynomial.Polynomial.fit(xs, np.asarray(f(xs), dtype=float), 1).convert()


def steklov_mean(f: FunctionHandle, h: float, interval: tuple) -> FunctionHandle:
    """Second-order Steklov mean ``f_h(x) = (1/h) int_{-h}^{h} (1 - |s|/h) g(x + s) ds``.

    ``g`` equals ``f`` on ``[a, b]`` and the least-squares lines of ``f`` on
    ``[a, a + h]`` and ``[b - h, b]`` outside it.  ``f_h''`` uses the exact
    identity ``(g(x + h) - 2 g(x) + g(x - h)) / h^2``.
    """
    if not h > 0:
        raise DomainError("h must be positive")
    a, b = float(interval[0]), float(interval[1])
    if not b - a >= h:
        raise DomainError("interval must be at least h long")
    left = _edge_line(f, a, a + h)
    right = _edge_line(f, b - h, b)

    def ext(u):
        u = np.asarray(u, dtype=float)
        out = np.empty_like(u)
        lo, hi = u < a, u > b
        mid = ~(lo | hi)
        out[lo] = left(u[lo])
        out[hi] = right(u[hi])
        if np.any(mid):
            out[mid] = np.asarray(f(u[mid]), dtype=float)
        return out

    xg, wg = gauss_legendre(24)
    kinks = [a, b, *f.breakpoints]

    def one(x):
        cuts = sorted({-h, 0.0, h, *[k - x for k in kinks if -h < k - x < h]})
        total = 0.0
        for u, v in zip(cuts[:-1], cuts[1:]):
            half = 0.5 * (v - u)
            s = 0.5 * (u + v) + half * xg
            total += half * float(np.dot(wg, (1.0 - np.abs(s) / h) * ext(x + s)))
        return total / h

    def value(x):
        x = np.asarray(x, dtype=float)
        return np.vectorize(one, otypes=[float])(x)

    def second(x):
        x = np.asarray(x, dtype=float)
        return (ext(x + h) - 2.0 * ext(x) + ext(x - h)) / h**2

    return FunctionHandle(value, f.growth_order, None, second, name=f"{f.name}_steklov")


def zhuk_check(f: FunctionHandle, h: float, interval: tuple, grid_step: float | None = None) -> tuple[float, float]:
    """``(||f - f_h||, (3/4) omega2(f; h))`` on ``interval`` (grid estimates)."""
    fh = steklov_mean(f, h, interval)
    step = h / 64 if grid_step is None else grid_step
    pts, _ = _grid(interval[0], interval[1], step)
    gap = float(np.max(np.abs(np.asarray(f(pts)) - fh(pts))))
    w2 = modulus2(f, h, interval, step).value
    return gap, 0.75 * w2


# --------------------------------------------------------------------------
# operator helpers


def operator_values(spec: OperatorSpec, f: FunctionHandle, xs: Sequence[float], opts: EvalOptions | None = None) -> np.ndarray:
    """``S_n(f; x)`` on ``xs``; monomials up to degree 4 use the exact series."""
    r = f.monomial
    if r is not None and r <= 4 and (spec.discrete or spec.kernel.moment_exists(r)):
        return np.array([apply_monomial(spec, r, x, opts) for x in xs])
    return apply_grid(spec, f, xs, opts)


def varrho(spec: OperatorSpec, x: float) -> float:
    """Second central moment from the oracle route."""
    return max(central_moments(spec, x).mu2, 0.0)


def _f(f: FunctionHandle, x: float) -> float:
    return float(np.asarray(f(np.array([x])))[0])


def _refined(check: Callable[[float], float], lhs: float, base_step: float) -> float:
    """Evaluate a modulus-dependent right side, halving the grid step on failure."""
    step = base_step
    rhs = check(step)
    for _ in range(_REFINEMENTS):
        if lhs <= rhs + _HOLD_SLACK:
            break
        step /= 2
        rhs = max(rhs, check(step))
    return rhs


# --------------------------------------------------------------------------
# bound checks


def _korovkin_grid(interval: tuple) -> np.ndarray:
    lo, hi = interval
    grid = np.linspace(lo, hi, 81)
    small = [lo + (hi - lo) * 2.0**-k for k in range(1, 15)]
    return np.unique(np.concatenate((grid, small)))


def korovkin_check(
    spec: OperatorSpec,
    n_grid: Sequence[float] = tuple(2.0**j for j in range(5, 11)),
    interval: tuple = (0.0, 2.0),
    f_set: Sequence[FunctionHandle] | None = None,
    ratio_band: tuple = (0.35, 0.65),
    ratio_from_n: float = 64,
    opts: EvalOptions | None = None,
) -> BoundCheckResult:
    """Sup errors on ``interval`` per ``n`` and their halving ratios.

    For each ``f`` and each doubling ``n/2 -> n`` with ``n >= ratio_from_n``
    two rows are emitted: ``err_n <= 0.65 err_{n/2}`` (``thm31_upper``) and
    ``0.35 err_{n/2} <= err_n`` (``thm31_lower``).  When the previous error
    is numerically zero the operator reproduces ``f`` and only
    ``err_n <= 1e-12`` is required.
    """
    from .functions import function_preset

    f_set = f_set or [function_preset(k) for k in ("one", "identity", "square")]
    xs = _korovkin_grid(interval)
    result = BoundCheckResult("thm31")
    ns = sorted(float(n) for n in n_grid)
    for f in f_set:
        fx = np.asarray(f(xs), dtype=float)
        errs = []
        for n in ns:
            vals = operator_values(spec.with_n(n), f, xs, opts)
            errs.append(float(np.max(np.abs(vals - fx))))
        result.constants[f"sup_errors[{f.name}]"] = errs
        for k in range(1, len(ns)):
            n, prev, cur = ns[k], errs[k - 1], errs[k]
            if n < ratio_from_n or ns[k - 1] * 2 != n:
                continue
            x_arg = float("nan")
            if prev <= 1e-13:
                result.rows.append(BoundRow("thm31_upper", n, x_arg, cur, 1e-12))
                continue
            result.rows.append(BoundRow("thm31_upper", n, x_arg, cur, ratio_band[1] * prev))
            result.rows.append(BoundRow("thm31_lower", n, x_arg, ratio_band[0] * prev, cur))
    return result


def lipschitz_check(
    spec: OperatorSpec,
    f: FunctionHandle,
    x_grid: Sequence[float] = DEFAULT_X_GRID,
    n_grid: Sequence[float] = DEFAULT_N_GRID,
    opts: EvalOptions | None = None,
) -> BoundCheckResult:
    """``|S_n f - f|(x) <= M (varrho_n(x) / x)^(alpha/2)`` with ``(M, alpha)`` from ``f.lipschitz``."""
    if f.lipschitz is None:
        raise DomainError(f"{f.name}: Lipschitz data (M, alpha) not declared")
    M, alpha = f.lipschitz
    if any(x <= 0 for x in x_grid):
        raise DomainError("x grid must be positive")
    result = BoundCheckResult("thm32", constants={"M": M, "alpha": alpha})
    for n in n_grid:
        s = spec.with_n(n)
        vals = operator_values(s, f, x_grid, opts)
        for x, v in zip(x_grid, vals):
            lhs = abs(v - _f(f, x))
            rhs = M * (varrho(s, x) / x) ** (alpha / 2)
            result.rows.append(BoundRow("thm32", float(n), float(x), lhs, rhs))
    return result


def voronovskaja_check(
    spec: OperatorSpec,
    f: FunctionHandle,
    x: float,
    ns: Sequence[float] = tuple(2.0**j for j in range(6, 13)),
    rel_tol: float = 0.01,
    opts: EvalOptions | None = None,
) -> BoundCheckResult:
    """Extrapolated ``n (S_n f - f)(x)`` against ``L1 f'(x) + L2 f''(x) / 2``.

    ``L1``, ``L2`` are extrapolated oracle limits of ``n mu1`` and ``n mu2``.
    The row holds when the two agree within ``rel_tol`` (relative, with an
    absolute floor of ``rel_tol * 1e-3``).  The printed right-hand side is
    evaluated alongside as ``constants["printed"]``; it is not asserted.
    """
    fx = _f(f, x)
    samples = []
    for n in ns:
        val = float(operator_values(spec.with_n(n), f, [x], opts)[0])
        samples.append((float(n), n * (val - fx)))
    fit = extrapolate_limit(samples)
    if fit.residual > 1e-2 * max(1.0, abs(fit.estimate)):
        raise AccuracyError(
            f"n (S_n f - f)({x}) does not follow a + b/n (residual {fit.residual:.3e})",
            estimate=fit.estimate,
            error=fit.residual,
        )
    L1 = limit_estimate(spec, x, 1).estimate
    L2 = limit_estimate(spec, x, 2).estimate
    target = L1 * float(f.d1(x)) + L2 * float(f.d2(x)) / 2.0
    gap = abs(fit.estimate - target)
    allowed = rel_tol * max(abs(target), 1e-3)
    result = BoundCheckResult(
        "thm33",
        constants={
            "estimate": fit.estimate,
            "target": target,
            "L1": L1,
            "L2": L2,
            "residual": fit.residual,
            "derived_L2": derived_limit(spec, x, 2),
            "printed": published_formula("thm33_rhs", spec, x, float(f.d1(x)), float(f.d2(x))),
        },
    )
    result.rows.append(BoundRow("thm33", math.inf, float(x), gap, allowed))
    return result


def local_bound_check(
    spec: OperatorSpec,
    f: FunctionHandle,
    b: float,
    x_grid: Sequence[float] = DEFAULT_X_GRID,
    n_grid: Sequence[float] = DEFAULT_N_GRID,
    M_f: float = 1.0,
    opts: EvalOptions | None = None,
) -> BoundCheckResult:
    """``|S_n f - f|(x) <= 4 M_f (1 + x^2) varrho + 2 omega_{b+1}(f; sqrt(varrho))`` for ``x in [0, b]``."""
    xs = [float(x) for x in x_grid if 0 <= x <= b]
    result = BoundCheckResult("thm34", constants={"b": b, "M_f": M_f})
    for n in n_grid:
        s = spec.with_n(n)
        vals = operator_values(s, f, xs, opts)
        for x, v in zip(xs, vals):
            lhs = abs(v - _f(f, x))
            rho2 = varrho(s, x)
            delta = math.sqrt(rho2)
            if delta == 0.0:
                result.rows.append(BoundRow("thm34", float(n), x, lhs, 0.0))
                continue

            def rhs_at(step, rho2=rho2, delta=delta):
                w = modulus1(f, delta, (0.0, b + 1.0), step).value
                return 4 * M_f * (1 + x * x) * rho2 + 2 * w

            rhs = _refined(rhs_at, lhs, delta / 64)
            result.rows.append(BoundRow("thm34", float(n), x, lhs, rhs))
    return result


def dt_bound_constant(
    spec: OperatorSpec,
    f: FunctionHandle,
    tau: float,
    x_grid: Sequence[float] = DEFAULT_X_GRID,
    n_grid: Sequence[float] = tuple(2.0**j for j in range(4, 11)),
    x_max: float = 20.0,
    stabilization: float = 2.0,
    opts: EvalOptions | None = None,
) -> BoundCheckResult:
    """Empirical constant ``C_n = max_x |S_n f - f|(x) / omega*(f; psi^(1-tau)(x)/sqrt(n))``.

    One row per ``n``: ``C_n <= stabilization * C_first``.  The overall
    constant (largest ``C_n``) and ``C_last / C_first`` are in ``constants``.
    """
    result = BoundCheckResult("dt_3_5", constants={"tau": tau})
    per_n = []
    for n in n_grid:
        s = spec.with_n(n)
        vals = operator_values(s, f, x_grid, opts)
        c_n, arg = 0.0, float(x_grid[0])
        for x, v in zip(x_grid, vals):
            lhs = abs(v - _f(f, x))
            t = float(_psi(x) ** (1 - tau)) / math.sqrt(n)
            w = dt_modulus(f, t, tau, x_max=x_max).value
            ratio = lhs / w if w > 0 else (0.0 if lhs <= 1e-14 else math.inf)
            if ratio > c_n:
                c_n, arg = ratio, float(x)
        per_n.append((float(n), arg, c_n))
    first = per_n[0][2]
    for n, arg, c_n in per_n:
        result.rows.append(BoundRow("dt_3_5", n, arg, c_n, stabilization * first))
    result.constants["C"] = max(c for _, _, c in per_n)
    result.constants["per_n"] = [c for _, _, c in per_n]
    result.constants["ratio"] = per_n[-1][2] / first if first > 0 else (0.0 if per_n[-1][2] == 0 else math.inf)
    return result


def steklov_bound_check(
    spec: OperatorSpec,
    f: FunctionHandle,
    a: float,
    x_grid: Sequence[float] = DEFAULT_X_GRID,
    n_grid: Sequence[float] = DEFAULT_N_GRID,
    opts: EvalOptions | None = None,
) -> BoundCheckResult:
    """With ``h^2 = sqrt(varrho_n(x))``:
    ``|S_n f - f|(x) <= (3/2 + 3a/4 + 3h^2/4) omega2(f; h) + (2 h^2 / a) ||f||``.

    ``omega2`` and the sup norm are taken on ``[0, a + 2h]``; ``x`` is restricted to ``[0, a]``.
    """
    if not a > 0:
        raise DomainError("a must be positive")
    xs = [float(x) for x in x_grid if 0 <= x <= a]
    result = BoundCheckResult("steklov_3_5", constants={"a": a})
    for n in n_grid:
        s = spec.with_n(n)
        vals = operator_values(s, f, xs, opts)
        for x, v in zip(xs, vals):
            lhs = abs(v - _f(f, x))
            h2 = math.sqrt(varrho(s, x))
            h = math.sqrt(h2)
            if h == 0.0:
                result.rows.append(BoundRow("steklov_3_5", float(n), x, lhs, 0.0))
                continue
            dom = (0.0, a + 2 * h)

            def rhs_at(step, h=h, h2=h2, dom=dom):
                pts, _ = _grid(dom[0], dom[1], step)
                norm = float(np.max(np.abs(np.asarray(f(pts), dtype=float))))
                w2 = modulus2(f, h, dom, step).value
                return (1.5 + 0.75 * a + 0.75 * h2) * w2 + 2 * h2 / a * norm

            rhs = _refined(rhs_at, lhs, h / 64)
            result.rows.append(BoundRow("steklov_3_5", float(n), x, lhs, rhs))
    return result


def weighted_convergence_check(
    spec: OperatorSpec,
    f: FunctionHandle,
    alpha: float,
    x_max: float = 10.0,
    n_grid: Sequence[float] = (16.0, 32.0, 64.0, 128.0, 256.0),
    decay: float = 8.0,
    x_points: int = 401,
    opts: EvalOptions | None = None,
) -> BoundCheckResult:
    """Weighted sup error ``sup_x |S_n f - f| / (1 + x^2)^(1 + alpha)`` per ``n``.

    Asserted: strict decrease between consecutive ``n`` (``thm41_sup``) and
    ``final < initial / decay`` (``thm41_decay``).  Report-only rows
    ``thm42_ratio`` give ``|S_n f - f|(x)`` against ``Omega*(f; 1/sqrt(n))``.
    """
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    xs = np.unique(np.concatenate((np.linspace(0.0, x_max, x_points), [x_max * 2.0**-k for k in range(4, 14)])))
    fx = np.asarray(f(xs), dtype=float)
    weight = (1.0 + xs**2) ** (1.0 + alpha)
    result = BoundCheckResult("thm41", constants={"alpha": alpha, "x_max": x_max})
    sups = []
    zero = 1e-14  # below this the operator reproduces f up to rounding
    for n in n_grid:
        err = np.abs(operator_values(spec.with_n(n), f, xs, opts) - fx)
        scaled = err / weight
        k = int(np.argmax(scaled))
        sup = float(scaled[k])
        if not sups:
            pass
        elif sups[-1] <= zero:
            result.rows.append(BoundRow("thm41_sup", float(n), float(xs[k]), sup, zero))
        else:
            # strict decrease: lhs must fall below the previous sup
            result.rows.append(
                BoundRow("thm41_sup", float(n), float(xs[k]), sup, math.nextafter(sups[-1], -math.inf) - _HOLD_SLACK)
            )
        sups.append(sup)
        omega = weighted_modulus(f, 1.0 / math.sqrt(n), x_max + 1.0).value
        for x in DEFAULT_X_GRID:
            if x > x_max:
                continue
            i = int(np.argmin(np.abs(xs - x)))
            result.rows.append(BoundRow("thm42_ratio", float(n), float(xs[i]), float(err[i]), omega, asserted=False))
    decay_rhs = sups[0] / decay if sups[0] > zero else zero
    result.rows.append(BoundRow("thm41_decay", float(n_grid[-1]), math.nan, sups[-1], decay_rhs))
    result.constants["sups"] = sups
    return result


def dbv_bound_check(
    spec: OperatorSpec,
    f: FunctionHandle,
    x_grid: Sequence[float] = DEFAULT_X_GRID,
    n_grid: Sequence[float] = tuple(2.0**j for j in range(6, 11)),
    M_f: float = 1.0,
    opts: EvalOptions | None = None,
) -> BoundCheckResult:
    """Derivative-of-bounded-variation bound with ``C_1 |varpi(x)|`` replaced by ``varrho_n(x)``.

    ``f`` must provide one-sided derivatives and an exact total-variation
    evaluator ``f.variation(lo, hi, open_end)`` for ``f'``.  Variations of
    the recentred derivative ``f'_x`` (which vanishes at ``x``) equal those
    of ``f'`` with the value at ``x`` replaced by the one-sided limit.

    ``constants["C1_fit"]`` is the smallest ``C_1`` with
    ``varrho_n(x) <= C_1 x (1 + c x) / rho`` over the grid, i.e. the constant
    the unscaled tail-bound form would need.
    """
    if f.variation is None:
        raise DomainError(f"{f.name}: no total-variation evaluator for f'")
    if any(x <= 0 for x in x_grid):
        raise DomainError("x grid must be positive")
    result = BoundCheckResult("thm51", constants={"M_f": M_f})
    c1_fit = 0.0
    for n in n_grid:
        s = spec.with_n(n)
        vals = operator_values(s, f, x_grid, opts)
        root_n = math.sqrt(n)
        ladder = range(1, int(math.isqrt(int(n)) if float(n).is_integer() else math.floor(root_n)) + 1)
        for x, v in zip(x_grid, vals):
            x = float(x)
            fm, fp = f.one_sided(x)
            cm = central_moments(s, x)
            rho2 = max(cm.mu2, 0.0)
            c1_fit = max(c1_fit, rho2 / (x * (1 + s.kernel.c * x) / s.kernel.rho))
            fx = _f(f, x)
            left = [f.variation(x - x / i, x, "hi") for i in ladder]
            right = [f.variation(x, x + x / i, "lo") for i in ladder]
            terms = [
                abs(cm.mu1) * abs(fp + fm) / 2,
                math.sqrt(rho2) * abs(fp - fm) / 2,
                rho2 / x * math.fsum(left),
                x / root_n * f.variation(x - x / root_n, x, "hi"),
                (4 * M_f + (M_f + abs(fx)) / x**2) * rho2,
                abs(fp) * math.sqrt(rho2),
                rho2 / x**2 * abs(_f(f, 2 * x) - fx - x * fp),
                x / root_n * f.variation(x, x + x / root_n, "lo"),
                rho2 / x * math.fsum(right),
            ]
            lhs = abs(v - fx)
            result.rows.append(BoundRow("thm51", float(n), x, lhs, math.fsum(terms)))
    result.constants["C1_fit"] = c1_fit
    return result
