"""scikit-learn style wrappers around the functional API.

The "data" is a column of evaluation points ``x``; ``fit`` only validates
the operator parameters, it does not learn anything from ``X``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .appell import PowerSeriesPair, derivatives_at_one, validate
from .exceptions import DomainError, ValidationError
from .functions import FunctionHandle, function_from_config
from .kernel import KernelParams
from .moments import central_moments, raw_moments
from .operator import EvalOptions, OperatorSpec, apply_grid

__all__ = ["AppellSzaszOperator", "CentralMomentTransformer"]

_DEFAULT_VALIDATION_GRID = (0.1, 1.0, 5.0)


def _points(X) -> np.ndarray:
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    arr = check_array(arr)
    if arr.shape[1] != 1:
        raise DomainError(f"expected a single column of x values, got {arr.shape[1]} columns")
    x = arr[:, 0]
    if np.any(x < 0):
        raise DomainError("x values must be nonnegative")
    return x


class _OperatorParams(BaseEstimator):
    def _build(self, X=None) -> None:
        series = PowerSeriesPair(tuple(self.a), tuple(self.b))
        self.spec_ = OperatorSpec(series, KernelParams(self.n, self.rho, self.c), discrete=self.discrete)
        self.derivatives_ = derivatives_at_one(series)
        grid = _DEFAULT_VALIDATION_GRID
        if X is not None:
            xs = _points(X)
            grid = tuple(sorted(set(float(v) for v in xs if v > 0))) or grid
        self.validation_ = validate(series, grid, self.i_max)
        if not self.validation_.ok:
            first = self.validation_.positivity_violations[0]
            raise ValidationError(
                f"p_{first[0]}({first[1]:g}) = {first[2]:.3e} is not positive", self.validation_
            )


class AppellSzaszOperator(_OperatorParams):
    """``predict(X)`` returns ``S_n(func; x)`` for each row of ``X``.

    ``func`` is a preset name, an inline polynomial/piecewise mapping, or a
    :class:`FunctionHandle`.
    """

    def __init__(
        self,
        a=(1.0,),
        b=(),
        n: float = 1.0,
        rho: float = 1.0,
        c: int = 0,
        discrete: bool = False,
        func="identity",
        weight_eps: float = 1e-12,
        printed_atom: bool = False,
        i_max: int = 40,
    ):
        self.a = a
        self.b = b
        self.n = n
        self.rho = rho
        self.c = c
        self.discrete = discrete
        self.func = func
        self.weight_eps = weight_eps
        self.printed_atom = printed_atom
        self.i_max = i_max

    def fit(self, X=None, y=None):
        self._build(X)
        self.function_ = self.func if isinstance(self.func, FunctionHandle) else function_from_config(self.func)
        self.options_ = EvalOptions(weight_eps=self.weight_eps, printed_atom=self.printed_atom)
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "spec_")
        return apply_grid(self.spec_, self.function_, _points(X), self.options_)


class CentralMomentTransformer(_OperatorParams, TransformerMixin):
    """Maps each ``x`` to ``(mu1, mu2, mu4)``, or to ``m0..m4`` with ``raw=True``."""

    def __init__(
        self,
        a=(1.0,),
        b=(),
        n: float = 1.0,
        rho: float = 1.0,
        c: int = 0,
        discrete: bool = False,
        route: str = "oracle",
        raw: bool = False,
        i_max: int = 40,
    ):
        self.a = a
        self.b = b
        self.n = n
        self.rho = rho
        self.c = c
        self.discrete = discrete
        self.route = route
        self.raw = raw
        self.i_max = i_max

    def fit(self, X=None, y=None):
        self._build(X)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "spec_")
        rows = []
        for x in _points(X):
            if self.raw:
                rows.append(raw_moments(self.spec_, x, self.route).m)
            else:
                cm = central_moments(self.spec_, x, self.route)
                rows.append((cm.mu1, cm.mu2, cm.mu4))
        return np.array(rows, dtype=float)

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        names = [f"m{r}" for r in range(5)] if self.raw else ["mu1", "mu2", "mu4"]
        return np.array(names, dtype=object)
