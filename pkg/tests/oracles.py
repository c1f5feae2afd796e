"""Independent reference formulas used as test oracles."""
import numpy as np


def literal_probability(delta_pulse, detuning, gamma=1.0):
    """Lorentzian prefactor times bracket, evaluated term by term without simplification."""
    a = (2 * gamma - delta_pulse) / 2
    b = (2 * gamma + delta_pulse) / 2
    pref = gamma**2 / (a**2 + detuning**2)
    bracket = 1 + delta_pulse / (2 * gamma) - delta_pulse * (2 * gamma + delta_pulse) / (b**2 + detuning**2)
    return pref * bracket


def exact_reactive_work(delta_pulse, detuning, gamma=1.0):
    """Reactive work of an exponential pulse over the whole run, ``-gamma Delta delta / (b^2 + delta^2)``."""
    b = gamma + delta_pulse / 2
    return -gamma * delta_pulse * detuning / (b**2 + detuning**2)


def quad_amplitude(t, delta_pulse, detuning, gamma=1.0, n=20001):
    """Variation-of-constants integral for the exponential drive, by trapezoid quadrature."""
    s = np.linspace(0.0, t, n)
    integrand = np.exp(-(gamma - 1j * detuning) * (t - s)) * np.sqrt(delta_pulse) * np.exp(-delta_pulse * s / 2)
    return -np.sqrt(gamma) * np.trapezoid(integrand, s)
