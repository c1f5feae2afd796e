"""Scikit-learn style wrappers around the closed form, the reduced solver and the chain sampler.

Nothing here learns from data; ``fit`` only validates input and records
``n_features_in_``.  The wrappers exist so the models drop into pipelines,
grid searches and ``cross_val_score``-style tooling.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .analytic import transition_probability
from .chain import DisorderSpec, expected_success, replicate_gene
from .dynamics import TimeGrid, accumulate_probability, evolve_branch
from .params import DistanceProfile, GeneString, ModelParams
from .pulses import ExponentialPulse


def _check_pairs(X):
    X = check_array(X, dtype=float, ensure_all_finite=True)
    if X.shape[1] != 2:
        raise ValueError(f"expected 2 columns (delta_pulse, detuning), got {X.shape[1]}")
    if np.any(X[:, 0] < 0):
        raise ValueError("delta_pulse column must be >= 0")
    return X


class ReplicationProbability(RegressorMixin, BaseEstimator):
    """Long-time absorption probability for rows ``(delta_pulse, detuning)``."""

    def __init__(self, gamma=1.0):
        self.gamma = gamma

    def fit(self, X, y=None):
        X = _check_pairs(X)
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "n_features_in_")
        X = _check_pairs(X)
        return np.atleast_1d(transition_probability(X[:, 0], X[:, 1], self.gamma))


class DynamicsProbability(ReplicationProbability):
    """Same target as :class:`ReplicationProbability`, obtained by integrating the amplitude equation.

    Rows with ``delta_pulse = 0`` are rejected because a monochromatic photon never finishes arriving.
    """

    def __init__(self, gamma=1.0, dt=None, t_max=None):
        self.gamma = gamma
        self.dt = dt
        self.t_max = t_max

    def predict(self, X):
        check_is_fitted(self, "n_features_in_")
        X = _check_pairs(X)
        out = np.empty(X.shape[0])
        for i, (delta, det) in enumerate(X):
            params = ModelParams(gamma=self.gamma).with_detuning(det)
            series = evolve_branch(params, ExponentialPulse(delta), "A", TimeGrid(t_max=self.t_max, dt=self.dt))
            out[i] = accumulate_probability(series).p_inf
        return out


class GeneReplicator(BaseEstimator):
    """Copies genes given as strings over {A, B}, one sample per row of ``X``.

    ``predict`` returns sampled copies (string array); ``predict_proba`` the
    per-base probability that the copy base matches the gene base; ``score``
    the mean Hamming fidelity of sampled copies.
    """

    def __init__(self, params=None, delta_pulse=0.1, distance=1.0, J0=10.0, r0=1.0, random_state=0):
        self.params = params
        self.delta_pulse = delta_pulse
        self.distance = distance
        self.J0 = J0
        self.r0 = r0
        self.random_state = random_state

    def _genes(self, X):
        X = check_array(np.asarray(X, dtype=object).reshape(-1, 1), dtype=None, ensure_all_finite=False)
        return [GeneString(str(g)) for g in X[:, 0]]

    def fit(self, X, y=None):
        self._genes(X)
        self.params_ = self.params if self.params is not None else ModelParams()
        self.disorder_ = DisorderSpec(family="fixed", delta=self.delta_pulse)
        self.n_features_in_ = 1
        return self

    def _profile(self, gene):
        return DistanceProfile.uniform(len(gene), self.distance, J0=self.J0, r0=self.r0)

    def predict(self, X):
        check_is_fitted(self, "params_")
        seed = int(self.random_state or 0)
        out = []
        for k, gene in enumerate(self._genes(X)):
            rec = replicate_gene(gene, self._profile(gene), self.disorder_, self.params_, seed=seed + k)
            out.append(str(rec.copy))
        return np.array(out, dtype=object)

    def predict_proba(self, X):
        check_is_fitted(self, "params_")
        return [expected_success(g, self._profile(g), self.params_, self.delta_pulse) for g in self._genes(X)]

    def score(self, X, y=None):
        genes = self._genes(X)
        copies = self.predict(X)
        return float(np.mean([np.mean([a == b for a, b in zip(str(g), c)]) for g, c in zip(genes, copies)]))
