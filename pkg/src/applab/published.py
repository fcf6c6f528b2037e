"""Literal transcriptions of published moment and limit formulas.

These exist only to be diffed against the oracle routes in
:mod:`applab.moments`; nothing else in the package consumes them.  Each
expression is typeset exactly as printed, including terms believed to be
misprints, and evaluated in scaled form: every ``e^{nx}`` factor becomes
``1`` and every ``e^{-nx}`` factor becomes ``d = e^{-2nx}``.

Keys follow the pattern ``<source>_<quantity>``:

* ``lemma21_m0..m4``  discrete operator moments ``T_n(z^m; x)``
* ``lemma22_m0..m4``  raw moments ``S_n(z^m; x)``
* ``lemma23_mu1, mu2, mu4``  central moments
* ``lemma24_lim1, lim2, lim4``  scaled limits of the central moments
* ``thm33_rhs``  right side of the asymptotic (Voronovskaja-type) formula
"""

from __future__ import annotations

import math
from typing import Callable, Optional

from .appell import derivatives_at_one
from .exceptions import DomainError

__all__ = ["PUBLISHED_FORMULAS", "published_formula"]

PUBLISHED_FORMULAS = (
    "lemma21_m0", "lemma21_m1", "lemma21_m2", "lemma21_m3", "lemma21_m4",
    "lemma22_m0", "lemma22_m1", "lemma22_m2", "lemma22_m3", "lemma22_m4",
    "lemma23_mu1", "lemma23_mu2", "lemma23_mu4",
    "lemma24_lim1", "lemma24_lim2", "lemma24_lim4",
    "thm33_rhs",
)


class _Ctx:
    def __init__(self, spec, x):
        t = derivatives_at_one(spec.series)
        self.A0, self.A1, self.A2, self.A3, self.A4 = t.A
        self.B0, self.B1, self.B2, self.B3, self.B4 = t.B
        self.n = spec.kernel.n
        self.rho = spec.kernel.rho
        self.c = spec.kernel.c
        self.x = float(x)
        self.d = math.exp(-2.0 * self.n * self.x)
        self.F = self.A0 + self.B0 * self.d
        self.N = self.n * self.rho

    def D(self, k):
        out = 1.0
        for j in range(1, k + 1):
            out *= self.N - j * self.c
        return out


def _l21_m1(q):
    return (q.A0 - q.B0 * q.d) / q.F * q.x + (q.A1 + q.B1 * q.d) / (q.n * q.F)


def _l21_m2(q):
    n, x, d, F = q.n, q.x, q.d, q.F
    return (
        x**2
        + ((2 * q.A1 + q.A0) - (2 * q.B1 + q.B0) * d) / (n * F) * x
        + ((q.A2 + q.A1) + (q.B2 + q.B1) * d) / (n**2 * F)
    )


def _l21_m3(q):
    n, x, d, F = q.n, q.x, q.d, q.F
    return (
        (q.A0 - q.B0 * d) / F * x**3
        + ((3 * q.A0 + 2 * q.A1) + (3 * q.B0 + 2 * q.B1) * d) / (n * F) * x**2
        + (
            (q.A0 + (n + 6) * q.A1 + 2 * n * q.A2)
            - (q.B0 + (6 - n) * q.B1 + 2 * n * q.B2) * d
        ) / (n**2 * F) * x
        + ((q.A1 + q.A3) + (q.B1 + q.B3) * d) / (n**3 * F)
    )


def _l21_m4(q):
    n, x, d, F = q.n, q.x, q.d, q.F
    x3 = (3 * (2 * q.A0 + q.A1) - 3 * (2 * q.B0 + q.B1) * d) / (n * F)
    x2 = (
        (7 * q.A0 + 13 * q.A1 + 4 * q.A2) + (7 * q.B0 + 11 * q.B1 + 4 * q.B2) * d
    ) / (n**2 * F)
    x1 = (
        ((-6 - 5 * n) * q.A0 + n * (2 * (7 + 3 * n) * q.A1 + 2 * (1 + 6 * n) * q.A2 + (2 + n) * q.A3))
        + ((-6 + 5 * n) * q.B0 + n * (2 * (-7 + 3 * n) * q.B1 + (2 - 12 * n) * q.B2 - 3 * q.B3)) * d
    ) / (n**4 * F)
    x0 = (
        ((6 - 5 * n) * q.A1 + n * (13 * q.A2 + 7 * q.A3 + q.A4))
        + ((6 - 5 * n) * q.B1 + n * (q.B2 + 5 * q.B3 + q.B4)) * d
    ) / (n**5 * F)
    return x**4 + x3 * x**3 + x2 * x**2 + x1 * x + x0


def _l22_m1(q):
    return (q.N * q.x * (q.A0 - q.B0 * q.d) + q.rho * (q.A1 + q.B1 * q.d)) / ((q.N - q.c) * q.F)


def _l22_m2(q):
    N, rho, x, d, F = q.N, q.rho, q.x, q.d, q.F
    D2 = q.D(2)
    return N**2 * x**2 / D2 + (
        N * ((q.A0 + 2 * rho * q.A1) - (q.B0 + 2 * rho * q.B1) * d) * x
        + rho * ((q.A1 + rho * q.A2) + (q.B1 + rho * q.B2) * d)
    ) / (D2 * F)


def _l22_m3(q):
    N, rho, x, d, F = q.N, q.rho, q.x, q.d, q.F
    return (
        N**3 * (q.A0 - q.B0 * d) * x**3
        + 3 * N**2 * ((q.A0 + rho * q.A1) + (q.B0 + rho * q.B1) * d) * x**2
        + N * (
            (2 * q.A0 + 3 * rho * (2 * q.A1 + rho * q.A2))
            - (2 * q.B0 + 3 * rho * (2 * q.B1 + rho * q.B2)) * d
        ) * x
        + rho * (
            (2 * q.A1 + rho * (3 * q.A2 + rho * q.A3))
            + (2 * q.B1 + rho * (3 * q.B2 + rho * q.B3)) * d
        )
    ) / (q.D(3) * F)


def _l22_m4(q):
    N, rho, x, d, F = q.N, q.rho, q.x, q.d, q.F
    D4 = q.D(4)
    return N**4 * x**4 / D4 + (
        2 * N**3 * ((3 * q.A0 + 2 * rho * q.A1) - (3 * q.B0 + 2 * rho * q.B1) * d) * x**3
        + N**2 * (
            (11 * q.A0 + 6 * rho * (3 * q.A1 + rho * q.A2))
            + (11 * q.B0 + 6 * rho * (3 * q.B1 + rho * q.B2)) * d
        ) * x**2
        + 2 * N * (
            (3 * q.A0 + rho * (11 * q.A1 + 9 * rho * q.A2 + 2 * rho**2 * q.A3))
            - (3 * q.B0 + rho * (11 * q.B1 + 9 * rho * q.B2 + 2 * rho**2 * q.B3)) * d
        ) * x
        + rho * (
            (6 * q.A1 + rho * (11 * q.A2 + 6 * rho * q.A3 + rho**2 * q.A4))
            + (6 * q.B1 + rho * (11 * q.B2 + 6 * rho * q.B3 + rho**2 * q.B4)) * d
        )
    ) / (D4 * F)


def _l23_mu1(q):
    c, rho, x, d, F = q.c, q.rho, q.x, q.d, q.F
    return (
        (-2 * q.N * q.B0 * d + c * (q.A0 + q.B0 * d)) * x + rho * (q.A1 + q.B1 * d)
    ) / ((q.N - c) * F)


def _l23_mu2(q):
    c, n, N, rho, x, d, F = q.c, q.n, q.N, q.rho, q.x, q.d, q.F
    return (
        c * N * ((q.A0 + 2 * c**2 * q.A0) + (-7 * q.B0 + (4 * N**2 + 2 * c**2) * q.B0) * d) * x**2
        + rho * ((n * q.A0 + 4 * c * q.A1) + (4 * c * q.B1 - n * (q.B0 + 4 * rho * q.B1)) * d) * x
        + rho * ((q.A1 + rho * q.A2) + (q.B1 + rho * q.B2) * d)
    ) / (q.D(2) * F)


def _l23_mu4(q):
    c, n, N, rho, x, d, F = q.c, q.n, q.N, q.rho, q.x, q.d, q.F
    A0, A1, A2, A3, A4 = q.A0, q.A1, q.A2, q.A3, q.A4
    B0, B1, B2, B3, B4 = q.B0, q.B1, q.B2, q.B3, q.B4
    x4 = (
        (46 * c**3 * N * A0 + 24 * c**4 * A0 + 3 * c**2 * N**2 * A0)
        + (
            -146 * c**3 * N * B0 - 104 * c * N**3 * B0 + 16 * N**4 * B0
            + 24 * c**4 * B0 + 211 * c**2 * N**2 * B0
        ) * d
    )
    x3 = (
        (96 * rho * c**3 * A1 + 4 * c**2 * n * (9 * A0 + 5 * rho * A1) + 3 * c * n**2 * rho * A0)
        + (
            96 * c**3 * B1 - 36 * c**2 * n * B0 - 124 * c**2 * n * rho * B1
            - 4 * n**3 * rho**2 * (3 * B0 + 4 * rho * B1) + 15 * c * n**2 * rho * B0
            + 84 * c * n**2 * rho**2 * B1
        ) * d
    )
    x2 = (
        rho * (
            72 * c**2 * (A1 + rho * A2) + 3 * n**2 * rho * A0
            - 2 * c * n * (16 * A0 + 3 * rho * (9 * A1 + rho * A2))
        )
        + (
            72 * c**2 * B1 + 72 * c**2 * rho * B2
            + n**2 * rho * (19 * B0 + 24 * rho * (2 * B1 + rho * B2))
            + 2 * c * n * (-16 * B0) - 3 * rho * (23 * B1 + 15 * rho * B2)
        ) * d
    )
    x1 = -(
        (
            2 * rho * (
                -8 * c * (2 * B1 + 3 * rho * B2) - 8 * c * n**3 * rho**2 * B3
                + 2 * n**4 * rho**3 * B3
                + n * (3 * B0 + rho * (15 * B1 + rho * (15 * B2 + 2 * rho * B3)))
            )
        ) * d
        - (3 * n * A0 + 16 * c * A1 + n * rho * (7 * A1 + 3 * rho * A2))
    )
    x0 = (
        rho * (6 * A1 + rho * (11 * A2 + 6 * rho * A3 + rho**2 * A4))
        + (6 * B1 + rho * (11 * B2 + 6 * n**3 * rho * B3 + rho**2 * B4)) * d
    )
    return (x4 * x**4 + x3 * x**3 + x2 * x**2 + x1 * x + x0) / (q.D(4) * F)


def _l24_lim1(q):
    return q.c * q.x / q.rho + q.A1 / q.A0


def _l24_lim2(q):
    return q.x * (1 + q.c * q.x) / q.rho


def _l24_lim4(q):
    return 3 * q.x**2 * (1 + q.c * q.x) ** 2 / q.rho**2


def _thm33_coefficients(q):
    first = q.c * q.x / q.rho + q.A1 / q.A0
    second = q.c * q.x**2 / q.rho + q.x * (q.A0 + (2 - q.A1 * q.rho)) / (q.A0 * q.rho)
    return first, second


_TABLE = {
    "lemma21_m0": lambda q: 1.0,
    "lemma21_m1": _l21_m1,
    "lemma21_m2": _l21_m2,
    "lemma21_m3": _l21_m3,
    "lemma21_m4": _l21_m4,
    "lemma22_m0": lambda q: 1.0,
    "lemma22_m1": _l22_m1,
    "lemma22_m2": _l22_m2,
    "lemma22_m3": _l22_m3,
    "lemma22_m4": _l22_m4,
    "lemma23_mu1": _l23_mu1,
    "lemma23_mu2": _l23_mu2,
    "lemma23_mu4": _l23_mu4,
    "lemma24_lim1": _l24_lim1,
    "lemma24_lim2": _l24_lim2,
    "lemma24_lim4": _l24_lim4,
}


def published_formula(
    name: str,
    spec,
    x: float,
    f1: Optional[float] = None,
    f2: Optional[float] = None,
) -> float:
    """Evaluate a transcribed formula for ``spec`` at ``x``.

    ``thm33_rhs`` needs ``f'(x)`` and ``f''(x)`` via ``f1``/``f2``; they
    default to the values of ``f(z) = z^2``.
    """
    q = _Ctx(spec, x)
    if name == "thm33_rhs":
        first, second = _thm33_coefficients(q)
        f1 = 2.0 * q.x if f1 is None else f1
        f2 = 2.0 if f2 is None else f2
        return first * f1 + second * f2 / 2.0
    try:
        func: Callable = _TABLE[name]
    except KeyError:
        raise DomainError(f"unknown formula {name!r}") from None
    return float(func(q))
