import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from conftest import family
from flutekind.criterion import FIRST_KIND, NOT_FIRST_KIND
from flutekind.estimator import FEATURES, FluteSurfaceClassifier
from flutekind.validation import ConfigError


def test_params_round_trip_through_clone():
    est = FluteSurfaceClassifier(depth=80, beam_width=16)
    again = clone(est)
    assert again.get_params() == est.get_params()
    assert again.get_params()["depth"] == 80


def test_fit_predict_transform():
    X = [family("2log_t0"), family("4log_t0").to_dict()]
    est = FluteSurfaceClassifier(depth=100).fit(X)
    assert list(est.predict(X)) == [FIRST_KIND, NOT_FIRST_KIND]
    Z = est.transform(X)
    assert Z.shape == (2, len(FEATURES)) and np.all(np.isfinite(Z))
    assert Z[0, 3] == 1.0 and Z[0, 0] > Z[1, 0]
    assert list(est.get_feature_names_out()) == list(FEATURES)


def test_not_fitted_and_bad_input():
    est = FluteSurfaceClassifier()
    with pytest.raises(NotFittedError):
        est.predict([family("4log_t0")])
    with pytest.raises(ConfigError):
        FluteSurfaceClassifier(depth=1).fit([family("4log_t0")])
    with pytest.raises(ConfigError):
        FluteSurfaceClassifier().fit([{"lengths": 5, "twist": 0}])
