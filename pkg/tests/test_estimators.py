import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from photorep.analytic import transition_probability
from photorep.estimators import DynamicsProbability, GeneReplicator, ReplicationProbability

X = np.array([[0.1, 0.0], [2.0, 0.0], [0.5, 3.0]])


def test_replication_probability_predict():
    est = ReplicationProbability().fit(X)
    np.testing.assert_allclose(est.predict(X), [transition_probability(*row) for row in X])
    assert est.n_features_in_ == 2


def test_score_is_perfect_on_own_targets():
    est = ReplicationProbability().fit(X)
    assert est.score(X, est.predict(X)) == pytest.approx(1.0)


def test_not_fitted():
    with pytest.raises(NotFittedError):
        ReplicationProbability().predict(X)


@pytest.mark.parametrize("bad", [np.array([[0.1, 0.0, 1.0]]), np.array([[-0.1, 0.0]]), np.array([[np.nan, 0.0]])])
def test_input_validation(bad):
    with pytest.raises(ValueError):
        ReplicationProbability().fit(bad)


def test_params_round_trip_and_clone():
    est = ReplicationProbability(gamma=2.0)
    assert est.get_params() == {"gamma": 2.0}
    assert clone(est).gamma == 2.0
    est.set_params(gamma=3.0)
    assert est.gamma == 3.0


def test_dynamics_estimator_matches_closed_form():
    est = DynamicsProbability().fit(X)
    np.testing.assert_allclose(est.predict(X), ReplicationProbability().fit(X).predict(X), atol=1e-6)


def test_in_pipeline():
    pipe = make_pipeline(FunctionTransformer(lambda a: a * [1.0, 1.0]), ReplicationProbability())
    assert pipe.fit(X).predict(X).shape == (3,)


def test_gene_replicator():
    est = GeneReplicator(delta_pulse=0.1, random_state=3).fit(["ABBA", "BBBB"])
    copies = est.predict(["ABBA", "BBBB"])
    assert copies.shape == (2,)
    assert all(len(c) == 4 for c in copies)
    np.testing.assert_array_equal(copies, est.predict(["ABBA", "BBBB"]))
    proba = est.predict_proba(["AB"])
    assert proba[0][0] == pytest.approx(transition_probability(0.1, 0.0))
    assert 0.0 <= est.score(["ABBA"] * 5) <= 1.0
    with pytest.raises(ValueError):
        GeneReplicator().fit(["ABC"])
