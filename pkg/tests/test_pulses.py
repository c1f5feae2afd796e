import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from photorep.exceptions import DomainError
from photorep.pulses import (
    ExponentialPulse,
    GaussianPulse,
    RectangularPulse,
    SampledPulse,
    VacuumPulse,
    pulse_drive,
    pulse_from_dict,
)

PULSES = [ExponentialPulse(0.5), GaussianPulse(2.0), RectangularPulse(4.0)]


@pytest.mark.parametrize("pulse", PULSES, ids=lambda p: p.kind)
def test_unit_norm(pulse):
    end = pulse.support_end(1e-14)
    pts = [b for b in pulse.breakpoints() if 0 < b < end]
    val, _ = quad(lambda t: abs(pulse.envelope(t)) ** 2, 0, end, points=pts or None, limit=500)
    assert val == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("pulse", PULSES, ids=lambda p: p.kind)
def test_tail_mass_matches_quadrature(pulse):
    t = 0.7 * pulse.support_end(1e-3)
    end = pulse.support_end(1e-15)
    val, _ = quad(lambda s: abs(pulse.envelope(s)) ** 2, t, end, limit=500)
    assert float(pulse.tail_mass(t)) == pytest.approx(val, abs=1e-9)


@pytest.mark.parametrize("pulse", PULSES, ids=lambda p: p.kind)
def test_causal(pulse):
    assert np.all(pulse.envelope(np.array([-5.0, -1e-9])) == 0)


@pytest.mark.parametrize("pulse", PULSES, ids=lambda p: p.kind)
def test_spectrum_parseval(pulse):
    nu = np.linspace(-400, 400, 400001)
    power = np.trapezoid(np.abs(pulse.spectrum(nu)) ** 2, nu) / (2 * np.pi)
    # the gaussian spectrum belongs to the untruncated pulse, which has the same norm up to 1e-15
    assert power == pytest.approx(1.0, abs=5e-3)


def test_exponential_spectrum_is_lorentzian():
    p = ExponentialPulse(0.3)
    nu = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(np.abs(p.spectrum(nu)) ** 2, 0.3 / (0.3**2 / 4 + nu**2))


def test_exponential_one_sided_at_front():
    p = ExponentialPulse(0.4)
    assert p.envelope(0.0, side=-1) == 0
    assert p.envelope(0.0, side=1) == pytest.approx(np.sqrt(0.4))
    assert p.jumps()[0][1] == pytest.approx(np.sqrt(0.4))


def test_rectangular_jumps_sum_to_zero():
    p = RectangularPulse(2.0)
    assert sum(du for _, du in p.jumps()) == pytest.approx(0)


@pytest.mark.parametrize("bad", [0.0, -1.0, np.inf, np.nan])
def test_invalid_linewidth(bad):
    with pytest.raises(DomainError):
        ExponentialPulse(bad)


def test_sampled_requires_unit_norm():
    t = np.linspace(0, 1, 11)
    with pytest.raises(DomainError):
        SampledPulse(t, np.ones(11) * 2.0)
    p = SampledPulse.normalized(t, np.ones(11) * 2.0)
    assert p.norm == pytest.approx(1.0)


def test_vacuum():
    v = VacuumPulse()
    assert v.norm == 0
    assert np.all(v.envelope(np.linspace(0, 3, 5)) == 0)


def test_drive_carrier():
    p = ExponentialPulse(0.2)
    t = 1.3
    expected = np.sqrt(0.2) * np.exp(-0.1 * t) * np.exp(-1j * 7.0 * t) * np.sqrt(2.0)
    assert pulse_drive(p, 7.0, t, gamma=2.0) == pytest.approx(expected)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 10))
def test_round_trip_dict(linewidth):
    p = ExponentialPulse(linewidth)
    assert pulse_from_dict(p.to_dict()) == p


def test_from_dict_shapes():
    assert isinstance(pulse_from_dict({"shape": "gaussian", "sigma": 1.0}), GaussianPulse)
    assert isinstance(pulse_from_dict({"shape": "rectangular", "duration": 1.0}), RectangularPulse)
    assert isinstance(pulse_from_dict({"shape": "vacuum"}), VacuumPulse)
    with pytest.raises(DomainError):
        pulse_from_dict({"shape": "sech"})
