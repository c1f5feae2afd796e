import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import exact_reactive_work
from photorep.analytic import closed_form_amplitude, susceptibility, transition_probability
from photorep.dynamics import (
    TimeGrid,
    accumulate_probability,
    conservation_residual,
    da_residual,
    evolve_branch,
    field_profiles,
    probability_budget,
    step_halving_check,
    work_breakdown,
)
from photorep.exceptions import ConvergenceError, DomainError, GridError
from photorep.params import ModelParams
from photorep.pulses import ExponentialPulse, GaussianPulse, RectangularPulse, SampledPulse, VacuumPulse

SHAPES = [ExponentialPulse(0.3), GaussianPulse(1.5), RectangularPulse(3.0)]


def resonant(det=0.0, **kw):
    return ModelParams(omega_L=kw.pop("omega_L", 10.0), omega_b0=kw.pop("omega_b0", 5.0), **kw).with_detuning(det)


@pytest.mark.parametrize("delta,det", [(0.1, 0.0), (0.5, 1.0), (2.0, 0.0), (1.0, -5.0), (4.0, 20.0)])
def test_amplitude_matches_closed_form(delta, det):
    s = evolve_branch(resonant(det), ExponentialPulse(delta))
    ref = closed_form_amplitude(s.t, delta, det)
    assert np.max(np.abs(s.amp - ref)) < 1e-7
    p = accumulate_probability(s).p_inf
    assert p == pytest.approx(transition_probability(delta, det), abs=1e-7)


def test_branch_b_uses_bare_detuning():
    params = resonant(0.0)
    s = evolve_branch(params, ExponentialPulse(0.1), "B")
    assert s.detuning == pytest.approx(5.0)
    assert accumulate_probability(s).p_inf == pytest.approx(transition_probability(0.1, 5.0), abs=1e-8)


def test_bad_branch():
    with pytest.raises(DomainError):
        evolve_branch(resonant(), ExponentialPulse(0.1), "C")


def test_delta_a0_only_dephases():
    pulse = ExponentialPulse(0.4)
    a = evolve_branch(resonant(1.0), pulse)
    b = evolve_branch(resonant(1.0, delta_a0=2.5), pulse)
    np.testing.assert_allclose(np.abs(a.lab_amplitude()), np.abs(b.lab_amplitude()), atol=1e-14)
    phase = b.lab_amplitude()[100] / a.lab_amplitude()[100]
    assert phase == pytest.approx(np.exp(-2.5j * b.t[100]))


@pytest.mark.parametrize("pulse", SHAPES + [SampledPulse.normalized(np.linspace(0, 4, 41), np.sin(np.linspace(0, np.pi, 41)))], ids=lambda p: p.kind)
@pytest.mark.parametrize("det", [0.0, 2.0])
@pytest.mark.parametrize("branch", ["A", "B"])
def test_conservation_every_time(pulse, det, branch):
    s = evolve_branch(resonant(det), pulse, branch)
    res = conservation_residual(s, pulse)
    assert res.shape == s.t.shape
    assert np.max(res) < 1e-6


def test_conservation_at_given_time():
    pulse = ExponentialPulse(0.3)
    s = evolve_branch(resonant(), pulse)
    assert conservation_residual(s, pulse, t=5.0) < 1e-7
    with pytest.raises(DomainError):
        conservation_residual(s, pulse, t=-1.0)


def test_vacuum_stays_empty():
    pulse = VacuumPulse()
    s = evolve_branch(resonant(), pulse, grid=TimeGrid(t_max=10.0))
    assert np.all(s.amp == 0)
    assert np.max(conservation_residual(s, pulse)) == 0.0
    assert accumulate_probability(s).p_inf == 0.0


def test_budget_parts_nonnegative_and_transmitted_is_complement():
    pulse = ExponentialPulse(0.2)
    s = evolve_branch(resonant(0.5), pulse)
    b = probability_budget(s, pulse)
    for part in (b.remaining, b.transmitted, b.excited, b.emitted):
        assert np.all(part >= -1e-15)
    p = accumulate_probability(s).p_inf
    assert b.transmitted[-1] == pytest.approx(1.0 - p, abs=1e-8)


@pytest.mark.parametrize("det", [0.0, 1.0, -3.0])
def test_field_profiles_match_budget(det):
    pulse = ExponentialPulse(0.5)
    params = resonant(det, delta_a0=0.7)
    s = evolve_branch(params, pulse, grid=TimeGrid(dt=0.01))
    t = 6.0
    prof = field_profiles(s, pulse, params, t)
    n_trans, n_emit = prof.norms()
    b = probability_budget(s, pulse)
    k = int(round(t / s.dt))
    assert n_emit == pytest.approx(b.emitted[k], abs=1e-8)
    assert n_trans == pytest.approx(b.transmitted[k] + b.remaining[k], abs=1e-8)
    with pytest.raises(DomainError):
        field_profiles(s, pulse, params, 6.005)


@pytest.mark.parametrize("delta,det", [(0.1, 0.0), (0.5, 1.0), (1.0, -3.0), (2.0, 5.0)])
def test_work_exponential_exact(delta, det):
    params = resonant(det)
    pulse = ExponentialPulse(delta)
    s = evolve_branch(params, pulse)
    w = work_breakdown(s, pulse, params)
    P = transition_probability(delta, det)
    assert w.w_abs == pytest.approx(2 * params.omega_L * P, rel=1e-7)
    assert w.w_reac == pytest.approx(exact_reactive_work(delta, det), abs=1e-7)
    assert w.identity_residual < 1e-8
    assert w.w_in == pytest.approx(w.w_in_direct, rel=1e-8, abs=1e-10)
    assert w.jump_times == (0.0,)


def test_reactive_work_monochromatic_limit():
    delta = 1e-3
    for det in (-5.0, -1.0, 1.0, 5.0):
        w = exact_reactive_work(delta, det)
        assert w == pytest.approx(delta * susceptibility(det).chi_re, rel=2e-3)


@pytest.mark.parametrize("pulse", SHAPES, ids=lambda p: p.kind)
def test_work_identity_other_shapes(pulse):
    params = resonant(1.0)
    s = evolve_branch(params, pulse)
    w = work_breakdown(s, pulse, params)
    assert w.identity_residual < 1e-6
    assert not w.misaligned_jumps


@pytest.mark.parametrize("pulse", SHAPES, ids=lambda p: p.kind)
@pytest.mark.parametrize("det", [0.0, 1.0, 3.0])
def test_dissipative_adaptation(pulse, det):
    check = da_residual(resonant(det), pulse)
    assert check.residual < 1e-6
    assert check.w_abs == pytest.approx(2 * 10.0 * check.absorbed_quanta)


def test_dissipative_adaptation_at_zero_carrier():
    check = da_residual(resonant(0.0, omega_L=0.0, omega_b0=0.0), ExponentialPulse(0.2))
    assert check.residual < 1e-6
    assert check.w_abs == 0.0


def test_unconverged_run_raises():
    with pytest.raises(ConvergenceError) as info:
        da_residual(resonant(), ExponentialPulse(0.1), grid=TimeGrid(t_max=5.0))
    assert info.value.tail_mass > 0


def test_coarse_grid_rejected():
    with pytest.raises(GridError):
        evolve_branch(resonant(20.0), ExponentialPulse(0.1), grid=TimeGrid(dt=0.05))


def test_step_halving_fourth_order():
    rep = step_halving_check(resonant(1.0), GaussianPulse(1.0), grid=TimeGrid(dt=0.08))
    rep2 = step_halving_check(resonant(1.0), GaussianPulse(1.0), grid=TimeGrid(dt=0.04))
    ratio = rep.max_amp_difference / rep2.max_amp_difference
    assert 12 < ratio < 20
    assert rep2.p_error < 1e-9


def test_rectangle_edge_lands_on_a_node():
    s = evolve_branch(resonant(), RectangularPulse(1.0), grid=TimeGrid(dt=0.03, t_max=30))
    k = round(1.0 / s.dt)
    assert k * s.dt == pytest.approx(1.0, abs=1e-12)
    assert s.dt <= 0.03


@settings(max_examples=15, deadline=None)
@given(st.floats(0.01, 4.0), st.floats(-20.0, 20.0))
def test_property_probability_and_conservation(delta, det):
    pulse = ExponentialPulse(delta)
    s = evolve_branch(resonant(det), pulse)
    assert accumulate_probability(s).p_inf == pytest.approx(transition_probability(delta, det), abs=1e-6)
    assert np.max(conservation_residual(s, pulse)) < 1e-6


@settings(max_examples=10, deadline=None)
@given(st.floats(0.0, 2 * math.pi))
def test_global_phase_of_pulse_is_invisible(theta):
    t = np.linspace(0, 5, 51)
    base = np.exp(-((t - 2.5) ** 2))
    a = SampledPulse.normalized(t, base)
    b = SampledPulse.normalized(t, base * np.exp(1j * theta))
    pa = accumulate_probability(evolve_branch(resonant(0.5), a)).p_inf
    pb = accumulate_probability(evolve_branch(resonant(0.5), b)).p_inf
    assert pa == pytest.approx(pb, abs=1e-12)
