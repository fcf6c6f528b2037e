"""Special functions, half-line quadrature and limit extrapolation."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .exceptions import AccuracyError, DomainError

__all__ = [
    "Accuracy",
    "LimitFit",
    "log_gamma",
    "gamma_ratio",
    "rising_factorial",
    "gauss_legendre",
    "gauss_laguerre",
    "integrate_halfline",
    "extrapolate_limit",
]


@dataclass(frozen=True)
class Accuracy:
    """Tolerance bundle for the quadrature routines."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_refinements: int = 8

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if not self.abs_tol >= 0:
            raise DomainError(f"abs_tol must be nonnegative, got {self.abs_tol}")
        if int(self.max_refinements) != self.max_refinements or self.max_refinements < 1:
            raise DomainError("max_refinements must be a positive integer")

    def target(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


@dataclass(frozen=True)
class LimitFit:
    """Result of fitting ``value ~ estimate + slope / n``."""

    estimate: float
    slope: float
    residual: float
    samples_used: int


def log_gamma(z: float) -> float:
    """Natural log of the gamma function for ``z > 0``."""
    z = float(z)
    if not z > 0 or math.isinf(z):
        raise DomainError(f"log_gamma requires a finite z > 0, got {z}")
    return math.lgamma(z)


def rising_factorial(q: float, r: int) -> float:
    """``q (q+1) ... (q+r-1)``; 1 for ``r == 0``."""
    out = 1.0
    for j in range(int(r)):
        out *= q + j
    return out


def gamma_ratio(p: float, q: float) -> float:
    """``Gamma(p) / Gamma(q)`` for positive arguments.

    When ``p - q`` is a small nonnegative integer the ratio is the rising
    factorial of ``q``, which is evaluated as a product to keep full
    precision for large arguments.  Ratios beyond the float range give ``inf``.
    """
    p = float(p)
    q = float(q)
    if not (p > 0 and q > 0):
        raise DomainError(f"gamma_ratio requires positive arguments, got ({p}, {q})")
    diff = p - q
    r = round(diff)
    if r >= 0 and r <= 64 and diff == r:
        return rising_factorial(q, r)
    try:
        return math.exp(math.lgamma(p) - math.lgamma(q))
    except OverflowError:
        return math.inf


@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(int(order))
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=32)
def gauss_laguerre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Laguerre rule for the weight ``exp(-t)`` via Golub-Welsch.

    Weights are normalized to sum to one (the weight has unit mass), which
    avoids the overflow of the textbook formula at high orders.
    """
    k = np.arange(order, dtype=float)
    nodes, vecs = eigh_tridiagonal(2.0 * k + 1.0, np.arange(1, order, dtype=float))
    weights = vecs[0] ** 2
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _vectorize(f: Callable) -> Callable[[np.ndarray], np.ndarray]:
    def call(z):
        z = np.asarray(z, dtype=float)
        return np.broadcast_to(np.asarray(f(z), dtype=float), z.shape)

    return call


def _laguerre_sum(f, order: int, scale: float) -> float:
    t, w = gauss_laguerre(order)
    keep = t < 700.0
    t = t[keep]
    vals = f(scale * t) * np.exp(t)
    return scale * math.fsum(w[keep] * vals)


def _gl_panel(g, a: float, b: float, order: int = 10) -> float:
    x, w = gauss_legendre(order)
    half = 0.5 * (b - a)
    return half * float(np.dot(w, g(a + half * (x + 1.0))))


def _adaptive_unit_interval(g, acc: Accuracy) -> tuple[float, float]:
    """Adaptive bisection of Gauss-Legendre panels on (0, 1).

    The starting mesh is graded geometrically towards both endpoints so
    that integrable endpoint singularities are resolved without deep
    recursion.
    """
    inner = [2.0**-k for k in range(40, 0, -1)]
    edges = sorted(set([0.0] + inner + [0.5] + [1.0 - e for e in inner] + [1.0]))

    def panel(a, b):
        whole = _gl_panel(g, a, b)
        m = 0.5 * (a + b)
        split = _gl_panel(g, a, m) + _gl_panel(g, m, b)
        return split, abs(split - whole)

    heap = []
    total = 0.0
    err = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, e = panel(a, b)
        heapq.heappush(heap, (-e, a, b, val))
        total += val
        err += e
    budget = 2000 * acc.max_refinements
    steps = 0
    while err > acc.target(total):
        if steps >= budget or not heap:
            raise AccuracyError(
                "adaptive quadrature did not converge", estimate=total, error=err
            )
        neg_e, a, b, val = heapq.heappop(heap)
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            raise AccuracyError("panel width underflow", estimate=total, error=err)
        lval, le = panel(a, m)
        rval, re_ = panel(m, b)
        total += lval + rval - val
        err += le + re_ + neg_e
        heapq.heappush(heap, (-le, a, m, lval))
        heapq.heappush(heap, (-re_, m, b, rval))
        steps += 1
    vals = sorted(item[3] for item in heap)
    return math.fsum(vals), err


def integrate_halfline(
    f: Callable,
    acc: Accuracy | None = None,
    tail: str = "exponential",
    scale: float = 1.0,
) -> tuple[float, float]:
    """Integrate ``f`` over ``[0, inf)``.

    Parameters
    ----------
    f : callable
        Vectorized integrand.
    acc : Accuracy, optional
    tail : {"exponential", "power"}
        Decay hint. Exponential tails use Gauss-Laguerre with order doubling
        (8, 16, ..., 8 * 2**(max_refinements-1)); power-law tails are mapped
        to (0, 1) by ``u = z / (s + z)`` and integrated with adaptive
        Gauss-Legendre panels.
    scale : float
        Length scale ``s`` of the integrand: the e-folding length for
        exponential tails, the knee of the power law otherwise.

    Returns
    -------
    value, err_estimate
    """
    acc = acc or Accuracy()
    if not scale > 0:
        raise DomainError("scale must be positive")
    g = _vectorize(f)
    s = float(scale)
    if tail == "exponential":
        prev = _laguerre_sum(g, 8, s)
        err = math.inf
        for k in range(1, acc.max_refinements):
            cur = _laguerre_sum(g, 8 * 2**k, s)
            err = abs(cur - prev)
            prev = cur
            if err <= acc.target(cur):
                return cur, err
        raise AccuracyError("Gauss-Laguerre did not converge", estimate=prev, error=err)
    if tail == "power":

        def mapped(u):
            one_minus = 1.0 - u
            return s * g(s * u / one_minus) / one_minus**2

        return _adaptive_unit_interval(mapped, acc)
    raise DomainError(f"unknown tail hint {tail!r}")


def extrapolate_limit(samples: Sequence[tuple[float, float]]) -> LimitFit:
    """Least-squares fit of ``v(n) = a + b/n`` on the largest-``n`` half.

    Uses at least three samples; ``residual`` is the largest absolute
    deviation of the fit on the samples it used.
    """
    pts = [(float(n), float(v)) for n, v in samples]
    if len(pts) < 3:
        raise DomainError("extrapolate_limit needs at least 3 samples")
    ns = np.array([p[0] for p in pts])
    if np.any(ns <= 0) or np.any(np.diff(ns) <= 0):
        raise DomainError("sample n values must be positive and strictly increasing")
    used = max(3, math.ceil(len(pts) / 2))
    ns = ns[-used:]
    vs = np.array([p[1] for p in pts[-used:]])
    design = np.column_stack([np.ones_like(ns), 1.0 / ns])
    coef, *_ = np.linalg.lstsq(design, vs, rcond=None)
    residual = float(np.max(np.abs(design @ coef - vs)))
    return LimitFit(float(coef[0]), float(coef[1]), residual, used)
