import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from applab.estimators import AppellSzaszOperator, CentralMomentTransformer
from applab.exceptions import DomainError, ValidationError


def test_operator_predict_matches_phillips_moments():
    est = AppellSzaszOperator(n=10, func="square").fit()
    np.testing.assert_allclose(est.predict([[1.0], [0.5]]), [1.2, 0.25 + 0.1], rtol=1e-9)
    assert est.spec_.n == 10
    assert est.derivatives_.A[0] == 1.0
    assert est.validation_.ok


def test_operator_accepts_one_dimensional_input_and_inline_function():
    est = AppellSzaszOperator(a=(1.0,), b=(0.5,), n=8, rho=2, c=1, func={"polynomial": [1.0]}).fit([0.3, 1.0])
    np.testing.assert_allclose(est.predict(np.array([0.3, 1.0])), 1.0, atol=1e-10)


def test_unfitted_and_bad_input():
    with pytest.raises(NotFittedError):
        AppellSzaszOperator().predict([[1.0]])
    est = AppellSzaszOperator().fit()
    with pytest.raises(DomainError):
        est.predict([[1.0, 2.0]])
    with pytest.raises(DomainError):
        est.predict([[-1.0]])
    with pytest.raises(ValueError):
        est.predict([[np.nan]])


def test_invalid_pair_fails_fit():
    with pytest.raises(ValidationError):
        AppellSzaszOperator(a=(0.5,), b=(0.5,)).fit()


def test_clone_preserves_params():
    est = AppellSzaszOperator(n=4, func="sin", printed_atom=True)
    assert clone(est).get_params() == est.get_params()


def test_transformer_central_and_raw_columns():
    tr = CentralMomentTransformer(n=10)
    out = tr.fit_transform(np.array([[1.0], [2.0]]))
    np.testing.assert_allclose(out[:, 0], 0.0, atol=1e-15)
    np.testing.assert_allclose(out[:, 1], [0.2, 0.4], rtol=1e-12)
    assert list(tr.get_feature_names_out()) == ["mu1", "mu2", "mu4"]
    raw = CentralMomentTransformer(n=10, raw=True).fit().transform([[1.0]])
    np.testing.assert_allclose(raw[0], [1.0, 1.0, 1.2, 1.66, 2.584], rtol=1e-12)


def test_transformer_in_pipeline():
    pipe = make_pipeline(CentralMomentTransformer(a=(1.0, 2.0), b=(0.1,), n=64, rho=0.5, c=2))
    out = pipe.fit_transform([[0.5], [1.0]])
    assert out.shape == (2, 3)
    assert np.all(out[:, 1] > 0)
