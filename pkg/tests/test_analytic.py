import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from oracles import literal_probability
from photorep.analytic import (
    branch_probabilities,
    classical_oscillator_work,
    closed_form_amplitude,
    monochromatic_work,
    susceptibility,
    transition_probability,
)
from photorep.exceptions import DomainError
from photorep.params import ModelParams

rates = st.floats(0.0, 50.0)
dets = st.floats(-100.0, 100.0)
gammas = st.floats(0.05, 20.0)


def test_perfect_limit_is_exactly_one():
    assert transition_probability(0.0, 0.0) == 1.0


@pytest.mark.parametrize(
    "delta,det,expected",
    [(2.0, 0.0, 0.5), (0.1, 0.0, 0.952381), (0.1, 10.0, 0.0103855), (0.1, 20.0, 0.0026178)],
)
def test_reference_values(delta, det, expected):
    assert transition_probability(delta, det) == pytest.approx(expected, abs=2e-6)


@given(rates, dets, gammas)
def test_matches_literal_form(delta, det, gamma):
    # the literal form divides 0/0 exactly at delta = 2 gamma, det = 0
    assume(abs(delta - 2 * gamma) > 1e-6 or abs(det) > 1e-6)
    lit = literal_probability(delta, det, gamma)
    assert transition_probability(delta, det, gamma) == pytest.approx(lit, rel=1e-9, abs=1e-12)


def test_removable_singularity_is_continuous():
    eps = np.array([1e-2, 1e-3, 1e-4, 1e-5])
    left = literal_probability(2.0 - eps, 0.0)
    right = literal_probability(2.0 + eps, 0.0)
    assert transition_probability(2.0, 0.0) == 0.5
    assert np.all(np.abs(left - 0.5) < 3 * eps)
    assert np.all(np.abs(right - 0.5) < 3 * eps)
    # central difference of the literal form agrees with d/dDelta (gamma / b) = -1/8;
    # h stays large enough that the 0/0 cancellation costs only ~1e-16 / h^2
    h = 1e-3
    fd = (literal_probability(2.0 + h, 0.0) - literal_probability(2.0 - h, 0.0)) / (2 * h)
    assert fd == pytest.approx(-0.125, rel=1e-5)


@given(rates, dets, gammas)
def test_bounded(delta, det, gamma):
    p = transition_probability(delta, det, gamma)
    assert 0.0 <= p <= 1.0


@given(rates, dets, gammas)
def test_even_in_detuning(delta, det, gamma):
    assert transition_probability(delta, det, gamma) == transition_probability(delta, -det, gamma)


@given(st.floats(0.0, 20.0), st.floats(0.0, 20.0), st.floats(0.0, 50.0))
def test_linewidth_dependence_flips_at_half_width(d1, d2, det):
    # with b = gamma + Delta/2, broadening lowers P while |det| < b and raises it beyond
    lo, hi = sorted((d1, d2))
    p_lo, p_hi = transition_probability(lo, det), transition_probability(hi, det)
    if det <= 1.0 + lo / 2:
        assert p_lo >= p_hi - 1e-15
    elif det >= 1.0 + hi / 2:
        assert p_lo <= p_hi + 1e-15


@given(st.floats(0.0, 20.0), st.floats(0.0, 50.0))
def test_decreasing_in_detuning(delta, det):
    assert transition_probability(delta, det) >= transition_probability(delta, det + 1.0)


@given(rates, dets, st.floats(0.1, 10.0))
def test_scale_invariance(delta, det, s):
    a = transition_probability(delta, det, 1.0)
    b = transition_probability(s * delta, s * det, s)
    assert b == pytest.approx(a, rel=1e-9, abs=1e-14)


def test_vectorised():
    d = np.array([0.01, 0.1, 1.0])
    out = transition_probability(d, np.zeros(3))
    assert out.shape == (3,)
    np.testing.assert_allclose(out, [transition_probability(x, 0.0) for x in d])


@pytest.mark.parametrize("delta,gamma", [(-0.1, 1.0), (0.1, 0.0), (0.1, -1.0), (math.nan, 1.0)])
def test_domain_errors(delta, gamma):
    with pytest.raises(DomainError):
        transition_probability(delta, 0.0, gamma)


def test_branch_probabilities_sum_to_one():
    bp = branch_probabilities(ModelParams(), 0.1)
    assert bp.p_rep + bp.p_fail == pytest.approx(1.0)
    assert bp.p_mut + bp.p_dorm == pytest.approx(1.0)
    assert bp.p_rep == pytest.approx(0.952381, abs=1e-6)
    assert bp.p_mut == pytest.approx(0.0103855, abs=1e-6)


def test_susceptibility_values():
    assert susceptibility(0.0).chi == pytest.approx(1j)
    c = susceptibility(1.0)
    assert c.chi_re == pytest.approx(-0.5)
    assert c.chi_im == pytest.approx(0.5)
    assert susceptibility(math.inf).chi == 0


@given(dets, gammas)
def test_susceptibility_lorentzian(det, gamma):
    c = susceptibility(det, gamma)
    assert c.chi_im == pytest.approx(gamma**2 / (gamma**2 + det**2), rel=1e-12)
    assert c.chi_im == pytest.approx(transition_probability(0.0, det, gamma), rel=1e-12)


def test_monochromatic_work_and_warning():
    p = ModelParams(omega_L=10.0).with_detuning(0.0)
    w = monochromatic_work(p, 0.01)
    assert w.w_abs == pytest.approx(20.0)
    assert w.w_reac == pytest.approx(0.0, abs=1e-15)
    with pytest.warns(RuntimeWarning):
        monochromatic_work(p, 0.5)


def test_classical_oscillator_agrees_with_quantum_limit():
    p = ModelParams(omega_L=10.0).with_detuning(1.0)
    chi = susceptibility(1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        w = monochromatic_work(p, 0.01)
    assert classical_oscillator_work(0.01, 10.0, chi) == pytest.approx(w.w_in)


@pytest.mark.parametrize("delta,det", [(0.3, 0.0), (0.5, 2.0), (2.0, 0.0), (1.0, -3.0)])
def test_closed_form_amplitude_against_quadrature(delta, det):
    from oracles import quad_amplitude

    for t in (0.5, 2.0, 7.0):
        assert closed_form_amplitude(t, delta, det) == pytest.approx(quad_amplitude(t, delta, det), abs=1e-7)
    assert closed_form_amplitude(-1.0, delta, det) == 0
