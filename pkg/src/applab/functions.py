"""Test functions with the metadata the operator and rate checks need."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .exceptions import DomainError

__all__ = [
    "FunctionHandle",
    "PiecewisePolynomial",
    "polynomial",
    "function_preset",
    "PRESET_NAMES",
    "function_from_config",
]


def _vec(func: Callable) -> Callable:
    def call(z):
        arr = np.asarray(z, dtype=float)
        out = np.broadcast_to(np.asarray(func(arr), dtype=float), arr.shape)
        return float(out) if out.ndim == 0 else np.array(out)

    return call


@dataclass(frozen=True)
class FunctionHandle:
    """A real function on ``[0, inf)`` plus declared metadata.

    ``growth_order`` is the exponent ``beta`` in ``|f(z)| <= N (1 + z^beta)``.
    ``monomial`` marks ``f(z) = z^r`` so exact moment routes can be used.
    ``lipschitz`` is ``(M, alpha)`` for the class
    ``|f(s) - f(x)| <= M |s - x|^alpha / (s + x)^(alpha/2)``.
    """

    func: Callable
    growth_order: float = 0.0
    derivative: Optional[Callable] = None
    second_derivative: Optional[Callable] = None
    breakpoints: tuple = ()
    lipschitz: Optional[tuple] = None
    name: str = "f"
    monomial: Optional[int] = None
    derivative_left: Optional[Callable] = None
    derivative_right: Optional[Callable] = None
    variation: Optional[Callable] = None
    sup_norm: Optional[float] = None

    def __post_init__(self):
        if not self.growth_order >= 0:
            raise DomainError("growth_order must be nonnegative")
        object.__setattr__(self, "breakpoints", tuple(sorted(float(b) for b in self.breakpoints)))

    def __call__(self, z):
        return _vec(self.func)(z)

    def d1(self, z):
        if self.derivative is None:
            raise DomainError(f"{self.name}: no first derivative declared")
        return _vec(self.derivative)(z)

    def d2(self, z):
        if self.second_derivative is None:
            raise DomainError(f"{self.name}: no second derivative declared")
        return _vec(self.second_derivative)(z)

    def one_sided(self, x: float) -> tuple[float, float]:
        """``(f'(x-), f'(x+))``."""
        if self.derivative_left is not None and self.derivative_right is not None:
            return float(self.derivative_left(x)), float(self.derivative_right(x))
        if self.derivative is not None and x not in self.breakpoints:
            v = float(self.d1(x))
            return v, v
        raise DomainError(f"{self.name}: one-sided derivatives unavailable at x={x}")


class PiecewisePolynomial:
    """Polynomial pieces on ``(-inf, t_1], [t_1, t_2], ..., [t_k, inf)``.

    ``pieces[j]`` holds ascending coefficients for the ``j``-th interval.
    The derivative at a breakpoint is taken as the midpoint of the one-sided
    values, so total variations of ``f'`` are exact for any interval.
    """

    def __init__(self, breakpoints: Sequence[float], pieces: Sequence[Sequence[float]]):
        bps = [float(b) for b in breakpoints]
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise DomainError("breakpoints must be strictly increasing")
        if len(pieces) != len(bps) + 1:
            raise DomainError("need exactly len(breakpoints) + 1 pieces")
        polys = []
        for coeffs in pieces:
            c = [float(v) for v in coeffs] or [0.0]
            if not all(math.isfinite(v) for v in c):
                raise DomainError("piece coefficients must be finite")
            polys.append(np.polynomial.Polynomial(c))
        self.breakpoints = tuple(bps)
        self.pieces = tuple(tuple(float(v) for v in p.coef) for p in polys)
        self._p = polys
        self._dp = [p.deriv() for p in polys]
        self._ddp = [p.deriv(2) for p in polys]

    def _piece_index(self, z: np.ndarray) -> np.ndarray:
        return np.searchsorted(np.asarray(self.breakpoints), z, side="right")

    def _eval(self, polys, z):
        z = np.asarray(z, dtype=float)
        idx = self._piece_index(z)
        out = np.zeros_like(z)
        for j, p in enumerate(polys):
            mask = idx == j
            if np.any(mask):
                out[mask] = p(z[mask])
        return out

    def __call__(self, z):
        return self._eval(self._p, z)

    def derivative(self, z):
        z = np.asarray(z, dtype=float)
        out = self._eval(self._dp, z)
        for j, b in enumerate(self.breakpoints):
            hit = z == b
            if np.any(hit):
                out[hit] = 0.5 * (self._dp[j](b) + self._dp[j + 1](b))
        return out

    def second_derivative(self, z):
        return self._eval(self._ddp, z)

    def derivative_left(self, x: float) -> float:
        j = int(np.searchsorted(np.asarray(self.breakpoints), x, side="left"))
        return float(self._dp[j](x))

    def derivative_right(self, x: float) -> float:
        j = int(np.searchsorted(np.asarray(self.breakpoints), x, side="right"))
        return float(self._dp[j](x))

    @property
    def degree(self) -> int:
        return max(len(p) - 1 for p in self.pieces)

    def derivative_variation(self, lo: float, hi: float, open_end: str = "") -> float:
        """Total variation of ``f'`` on ``[lo, hi]``.

        ``open_end`` in ``{"", "lo", "hi"}`` excludes the value at that end,
        i.e. uses the one-sided limit there instead of the breakpoint midpoint.
        """
        if hi < lo:
            raise DomainError("need lo <= hi")
        if hi == lo:
            return 0.0
        total = 0.0
        inner = [b for b in self.breakpoints if lo < b < hi]
        edges = [lo] + inner + [hi]
        for u, v in zip(edges[:-1], edges[1:]):
            j = int(self._piece_index(np.array([0.5 * (u + v)]))[0])
            dp = self._dp[j]
            pts = [u]
            crit = self._ddp[j].roots() if self._ddp[j].degree() >= 1 else []
            for r in np.atleast_1d(crit):
                if abs(r.imag) < 1e-12 and u < r.real < v:
                    pts.append(float(r.real))
            pts.append(v)
            vals = [float(dp(t)) for t in sorted(pts)]
            total += math.fsum(abs(b - a) for a, b in zip(vals[:-1], vals[1:]))
        for b in inner:
            total += abs(self.derivative_right(b) - self.derivative_left(b))
        if lo in self.breakpoints and open_end != "lo":
            total += 0.5 * abs(self.derivative_right(lo) - self.derivative_left(lo))
        if hi in self.breakpoints and open_end != "hi":
            total += 0.5 * abs(self.derivative_right(hi) - self.derivative_left(hi))
        return total

    def handle(self, name: str = "piecewise") -> FunctionHandle:
        mono = None
        if not self.breakpoints:
            nz = [k for k, v in enumerate(self.pieces[0]) if v != 0.0]
            if len(nz) == 1 and self.pieces[0][nz[0]] == 1.0:
                mono = nz[0]
        return FunctionHandle(
            func=self.__call__,
            growth_order=float(self.degree),
            derivative=self.derivative,
            second_derivative=self.second_derivative,
            breakpoints=self.breakpoints,
            name=name,
            monomial=mono,
            derivative_left=self.derivative_left,
            derivative_right=self.derivative_right,
            variation=self.derivative_variation,
        )


def polynomial(coeffs: Sequence[float], name: str = "polynomial") -> FunctionHandle:
    return PiecewisePolynomial([], [coeffs]).handle(name)


def _sqrt_d1(z):
    with np.errstate(divide="ignore"):
        return 0.5 / np.sqrt(z)


def _sqrt_d2(z):
    with np.errstate(divide="ignore"):
        return -0.25 / z**1.5


def _build_presets() -> dict:
    pp = {
        "one": PiecewisePolynomial([], [[1.0]]),
        "identity": PiecewisePolynomial([], [[0.0, 1.0]]),
        "square": PiecewisePolynomial([], [[0.0, 0.0, 1.0]]),
        "cube": PiecewisePolynomial([], [[0.0, 0.0, 0.0, 1.0]]),
        "abs_shift1": PiecewisePolynomial([1.0], [[1.0, -1.0], [-1.0, 1.0]]),
    }
    out = {name: poly.handle(name) for name, poly in pp.items()}
    out["one"] = replace(out["one"], sup_norm=1.0)
    out["exp_neg"] = FunctionHandle(
        lambda z: np.exp(-z), 0.0, lambda z: -np.exp(-z), lambda z: np.exp(-z),
        name="exp_neg", sup_norm=1.0,
    )
    out["sqrt"] = FunctionHandle(
        np.sqrt, 0.5, _sqrt_d1, _sqrt_d2, breakpoints=(), lipschitz=(1.0, 1.0), name="sqrt",
    )
    out["sin"] = FunctionHandle(
        np.sin, 0.0, np.cos, lambda z: -np.sin(z), name="sin", sup_norm=1.0,
    )
    out["rational"] = FunctionHandle(
        lambda z: z / (1.0 + z), 0.0, lambda z: 1.0 / (1.0 + z) ** 2,
        lambda z: -2.0 / (1.0 + z) ** 3, name="rational", sup_norm=1.0,
    )
    out["inv1p"] = FunctionHandle(
        lambda z: 1.0 / (1.0 + z), 0.0, lambda z: -1.0 / (1.0 + z) ** 2,
        lambda z: 2.0 / (1.0 + z) ** 3, name="inv1p", sup_norm=1.0,
    )
    return out


_PRESETS = _build_presets()
PRESET_NAMES = tuple(sorted(_PRESETS))


def function_preset(name: str) -> FunctionHandle:
    try:
        return _PRESETS[name]
    except KeyError:
        raise DomainError(f"unknown function preset {name!r}; choose from {', '.join(PRESET_NAMES)}") from None


def function_from_config(spec) -> FunctionHandle:
    """Build a handle from a preset name or an inline polynomial/piecewise object."""
    if isinstance(spec, str):
        return function_preset(spec)
    if isinstance(spec, dict):
        if "polynomial" in spec:
            return polynomial(spec["polynomial"], name="polynomial")
        if "piecewise" in spec:
            body = spec["piecewise"]
            return PiecewisePolynomial(body.get("breakpoints", []), body["pieces"]).handle("piecewise")
    raise DomainError(f"function must be a preset name or an inline polynomial/piecewise object, got {spec!r}")
