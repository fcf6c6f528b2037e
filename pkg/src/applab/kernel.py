"""Paltanea kernel: gamma density (c = 0) or beta-prime density (c >= 1).

For index ``i`` and ``a = i*rho``, ``N = n*rho``::

    c = 0 : phi(z) = N / Gamma(a) * exp(-N z) * (N z)^(a-1)
    c >= 1: phi(z) = Gamma(N/c + a) / (Gamma(a) Gamma(N/c)) * c^a z^(a-1) / (1 + c z)^(N/c + a)

Kernel integrals are computed in the variable ``t = log z``, where every
kernel is smooth, unimodal and decays at least exponentially in both
directions.  Composite Gauss-Legendre panels of width about one standard
deviation (in ``t``) are laid over the significant range, split at the
integrand's declared breakpoints, and doubled until two consecutive panel
counts agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln

from .exceptions import AccuracyError, DivergentMomentError, DomainError
from .numerics import Accuracy, gauss_legendre, rising_factorial

__all__ = [
    "KernelParams",
    "kernel_log_density",
    "kernel_raw_moment",
    "kernel_integrate",
    "kernel_integrals",
]

_POLE_RTOL = 1e-9
# log-range kept around the peak; exp(-50) ~ 2e-22
_LOG_DEPTH = 50.0
_GL_ORDER = 8
_MAX_PANELS = 4096
_CHUNK_PANELS = 1 << 16
_T_MAX = 700.0


@dataclass(frozen=True)
class KernelParams:
    n: float
    rho: float
    c: int = 0

    def __post_init__(self):
        if not (self.n > 0 and math.isfinite(self.n)):
            raise DomainError(f"n must be positive, got {self.n}")
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise DomainError(f"rho must be positive, got {self.rho}")
        if int(self.c) != self.c or self.c < 0:
            raise DomainError(f"c must be a nonnegative integer, got {self.c}")
        object.__setattr__(self, "n", float(self.n))
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "c", int(self.c))

    @property
    def n_rho(self) -> float:
        return self.n * self.rho

    def moment_exists(self, r: float) -> bool:
        """True when the kernel moment of order ``r`` is finite."""
        if self.c == 0 or r <= 0:
            return True
        gap = self.n_rho - r * self.c
        return gap > _POLE_RTOL * self.n_rho

    def require_moment(self, r: float) -> None:
        if not self.moment_exists(r):
            raise DivergentMomentError(
                f"moment of order {r} diverges: n*rho = {self.n_rho:g} <= {r}*c = {r * self.c:g}"
            )

    def with_n(self, n: float) -> "KernelParams":
        return KernelParams(n, self.rho, self.c)


def kernel_log_density(p: KernelParams, i: int, zeta) -> np.ndarray | float:
    """``log phi_{n,i}(zeta)`` for ``i >= 1`` and ``zeta > 0``."""
    if int(i) != i or i < 1:
        raise DomainError("kernel index must be an integer >= 1 (i = 0 is the atom at zero)")
    z = np.asarray(zeta, dtype=float)
    if np.any(~(z > 0)):
        raise DomainError("kernel density requires zeta > 0")
    a = i * p.rho
    N = p.n_rho
    if p.c == 0:
        out = math.log(N) - gammaln(a) - N * z + (a - 1.0) * np.log(N * z)
    else:
        b = N / p.c
        out = (
            gammaln(a + b) - gammaln(a) - gammaln(b) + a * math.log(p.c)
            + (a - 1.0) * np.log(z) - (a + b) * np.log1p(p.c * z)
        )
    return float(out) if np.ndim(out) == 0 else out


def kernel_raw_moment(p: KernelParams, i: int, r: int) -> float:
    """Closed-form ``int phi_{n,i}(z) z^r dz``."""
    if int(i) != i or i < 1:
        raise DomainError("kernel index must be an integer >= 1")
    if int(r) != r or r < 0:
        raise DomainError("moment order must be a nonnegative integer")
    if r == 0:
        return 1.0
    p.require_moment(r)
    denom = 1.0
    for j in range(1, r + 1):
        denom *= p.n_rho - j * p.c
    return rising_factorial(i * p.rho, r) / denom


class _LogKernels:
    """Log-density of a batch of kernels in the variable t = log z (Jacobian included)."""

    def __init__(self, p: KernelParams, indices: np.ndarray):
        self.p = p
        self.a = indices * p.rho
        N = p.n_rho
        if p.c == 0:
            self.const = self.a * math.log(N) - gammaln(self.a)
            self.mode = np.log(self.a / N)
            self.sigma = 1.0 / np.sqrt(self.a)
        else:
            self.b = N / p.c
            self.logc = math.log(p.c)
            self.const = (
                gammaln(self.a + self.b) - gammaln(self.a) - gammaln(self.b) + self.a * self.logc
            )
            self.mode = np.log(self.a / self.b) - self.logc
            self.sigma = np.sqrt((self.a + self.b) / (self.a * self.b))

    def __call__(self, t: np.ndarray, owner=None) -> np.ndarray:
        sel = slice(None) if owner is None else owner
        a = self.a[sel]
        const = self.const[sel]
        if owner is not None and t.ndim == 2:
            a = a[:, None]
            const = const[:, None]
        if self.p.c == 0:
            return const + a * t - self.p.n_rho * np.exp(t)
        return const + a * t - (a + self.b) * np.logaddexp(0.0, self.logc + t)

    def range(self, growth: float) -> tuple[np.ndarray, np.ndarray]:
        """Interval in t outside which the envelope is below exp(-_LOG_DEPTH) of its peak."""

        def envelope(t):
            return self(t) + growth * np.maximum(t, 0.0)

        level = envelope(self.mode) - _LOG_DEPTH
        lo = self._cross(envelope, level, -1.0)
        hi = self._cross(envelope, level, +1.0)
        return lo, np.minimum(hi, _T_MAX)

    def _cross(self, envelope, level, direction):
        inside = self.mode.copy()
        step = self.sigma.copy()
        outside = inside + direction * step
        for _ in range(80):
            above = envelope(outside) > level
            if not np.any(above):
                break
            inside = np.where(above, outside, inside)
            step = np.where(above, 2.0 * step, step)
            outside = np.where(above, inside + direction * step, outside)
            if direction > 0 and np.all(outside[above] > _T_MAX):
                break
        for _ in range(60):
            mid = 0.5 * (inside + outside)
            above = envelope(mid) > level
            inside = np.where(above, mid, inside)
            outside = np.where(above, outside, mid)
        return outside


def _panel_sums(kern: _LogKernels, f, lo, hi, panels, log_breaks):
    """Composite Gauss-Legendre sums of ``kernel * f`` and ``kernel * |f|`` per kernel."""
    m = lo.size
    owner = np.repeat(np.arange(m), panels)
    first = np.concatenate(([0], np.cumsum(panels)[:-1]))
    k = np.arange(owner.size) - np.repeat(first, panels)
    width = (hi - lo) / panels
    left = lo[owner] + k * width[owner]
    right = np.where(k == panels[owner] - 1, hi[owner], left + width[owner])
    for lb in log_breaks:
        cut = (left < lb) & (lb < right)
        if np.any(cut):
            owner = np.concatenate((owner, owner[cut]))
            new_left = np.full(int(cut.sum()), lb)
            new_right = right[cut]
            right = np.where(cut, lb, right)
            left = np.concatenate((left, new_left))
            right = np.concatenate((right, new_right))
    order = np.argsort(owner, kind="stable")
    owner, left, right = owner[order], left[order], right[order]
    xg, wg = gauss_legendre(_GL_ORDER)
    sums = np.zeros(m)
    abs_sums = np.zeros(m)
    for start in range(0, owner.size, _CHUNK_PANELS):
        sl = slice(start, start + _CHUNK_PANELS)
        own = owner[sl]
        half = 0.5 * (right[sl] - left[sl])
        t = (0.5 * (right[sl] + left[sl]))[:, None] + half[:, None] * xg[None, :]
        dens = np.exp(kern(t, own))
        z = np.exp(t)
        fz = np.broadcast_to(np.asarray(f(z.ravel()), dtype=float), (z.size,)).reshape(z.shape)
        contrib = (dens * fz) @ wg * half
        abs_contrib = (dens * np.abs(fz)) @ wg * half
        sums += np.bincount(own, weights=contrib, minlength=m)
        abs_sums += np.bincount(own, weights=abs_contrib, minlength=m)
    return sums, abs_sums


def kernel_integrals(
    p: KernelParams,
    indices: Sequence[int],
    f: Callable,
    acc: Accuracy | None = None,
    growth: float = 2.0,
    breakpoints: Sequence[float] = (),
    importance: Sequence[float] | None = None,
) -> np.ndarray:
    """``int phi_{n,i}(z) f(z) dz`` for every ``i`` in ``indices``.

    Parameters
    ----------
    growth : float
        Declared power growth of ``|f|``; used only to size the integration
        range and to reject kernels whose moment of that order diverges.
    breakpoints : sequence of float
        Points where ``f`` or its derivatives jump; panels are split there.
    importance : sequence of float, optional
        Nonnegative multipliers (operator weights).  When given, the
        stopping rule targets the accuracy of ``sum importance_i * I_i``
        instead of every integral individually.
    """
    acc = acc or Accuracy()
    idx = np.asarray(indices, dtype=float)
    if idx.size == 0:
        return np.zeros(0)
    if np.any(idx < 1) or np.any(idx != np.round(idx)):
        raise DomainError("kernel indices must be integers >= 1")
    p.require_moment(math.ceil(growth) if growth > 0 else 0)
    if p.c and growth >= p.n_rho / p.c:
        raise DivergentMomentError(f"growth order {growth} too large for n*rho/c = {p.n_rho / p.c:g}")
    kern = _LogKernels(p, idx)
    lo, hi = kern.range(max(growth, 0.0))
    log_breaks = [math.log(b) for b in sorted(set(breakpoints)) if b > 0]
    panels = np.clip(np.ceil((hi - lo) / kern.sigma), 4, _MAX_PANELS).astype(np.int64)

    coarse, _ = _panel_sums(kern, f, lo, hi, panels, log_breaks)
    panels = panels * 2
    fine, l1 = _panel_sums(kern, f, lo, hi, panels, log_breaks)
    weight = None if importance is None else np.asarray(importance, dtype=float)
    for level in range(acc.max_refinements):
        err = np.abs(fine - coarse)
        if weight is None:
            todo = err > np.maximum(acc.abs_tol, acc.rel_tol * l1)
        else:
            target = max(acc.abs_tol, acc.rel_tol * float(weight @ l1))
            if float(weight @ err) <= target:
                todo = np.zeros(idx.size, dtype=bool)
            else:
                todo = weight * err > target / idx.size
        if not np.any(todo):
            return fine
        if level == acc.max_refinements - 1 or np.any(panels[todo] * 2 > 64 * _MAX_PANELS):
            break
        sub = np.flatnonzero(todo)
        panels[sub] *= 2
        sub_kern = _LogKernels(p, idx[sub])
        new, new_l1 = _panel_sums(sub_kern, f, lo[sub], hi[sub], panels[sub], log_breaks)
        coarse = fine.copy()
        fine = fine.copy()
        fine[sub] = new
        l1[sub] = new_l1
        coarse_mask = np.ones(idx.size, dtype=bool)
        coarse_mask[sub] = False
        coarse[coarse_mask] = fine[coarse_mask]
    worst = float(np.max(np.abs(fine - coarse)))
    raise AccuracyError(
        f"kernel quadrature did not converge (n={p.n}, rho={p.rho}, c={p.c}); worst delta {worst:.3e}",
        estimate=fine,
        error=worst,
    )


def kernel_integrate(
    p: KernelParams,
    i: int,
    f: Callable,
    acc: Accuracy | None = None,
    growth: float = 2.0,
    breakpoints: Sequence[float] = (),
) -> float:
    """Single-index version of :func:`kernel_integrals`."""
    if int(i) != i or i < 1:
        raise DomainError("kernel index must be an integer >= 1")
    return float(kernel_integrals(p, [i], f, acc, growth, breakpoints)[0])
