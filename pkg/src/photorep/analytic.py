"""Closed-form long-time probabilities, susceptibility and monochromatic work."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .params import ModelParams, detunings


def _check_rates(delta_pulse, gamma):
    if np.any(~(np.asarray(gamma, dtype=float) > 0)):
        raise DomainError(f"gamma must be > 0, got {gamma!r}")
    if np.any(~(np.asarray(delta_pulse, dtype=float) >= 0)):
        raise DomainError(f"pulse linewidth must be >= 0, got {delta_pulse!r}")


def transition_probability(delta_pulse, detuning, gamma=1.0):
    """Long-time absorption probability of an exponential single-photon pulse.

    The textbook form is a Lorentzian prefactor of half-width ``gamma - Delta/2``
    times a bracket that vanishes at ``Delta = 2 gamma, detuning = 0``.  Using
    ``b = gamma + Delta/2`` the bracket equals
    ``b ((gamma - Delta/2)^2 + detuning^2) / (gamma (b^2 + detuning^2))``, so the
    product cancels to ``gamma b / (b^2 + detuning^2)``, which is what is
    evaluated here.  Works elementwise on arrays.
    """
    _check_rates(delta_pulse, gamma)
    delta_pulse = np.asarray(delta_pulse, dtype=float)
    detuning = np.asarray(detuning, dtype=float)
    b = gamma + 0.5 * delta_pulse
    p = gamma * b / (b * b + detuning * detuning)
    if np.any(np.isnan(p)):
        raise DomainError("transition probability undefined for the given arguments")
    p = np.clip(p, 0.0, 1.0)
    return float(p) if p.ndim == 0 else p


@dataclass(frozen=True)
class BranchProbabilities:
    p_rep: float
    p_fail: float
    p_dorm: float
    p_mut: float

    def as_dict(self):
        return {"p_rep": self.p_rep, "p_fail": self.p_fail, "p_dorm": self.p_dorm, "p_mut": self.p_mut}


def branch_probabilities(params: ModelParams, delta_pulse) -> BranchProbabilities:
    """Replication/failure (gene base ``a``) and dormant/mutation (gene base ``b``) probabilities."""
    d = detunings(params)
    p_rep = transition_probability(delta_pulse, d.delta_LbJ, params.gamma)
    p_mut = transition_probability(delta_pulse, d.delta_Lb, params.gamma)
    return BranchProbabilities(p_rep=p_rep, p_fail=1.0 - p_rep, p_dorm=1.0 - p_mut, p_mut=p_mut)


@dataclass(frozen=True)
class Susceptibility:
    chi: complex

    @property
    def chi_re(self):
        return self.chi.real

    @property
    def chi_im(self):
        return self.chi.imag


def susceptibility(detuning, gamma=1.0) -> Susceptibility:
    """Linear response ``chi = i gamma / (gamma - i detuning)`` of the driven two-level transition."""
    if not gamma > 0:
        raise DomainError(f"gamma must be > 0, got {gamma!r}")
    if np.isinf(detuning):
        return Susceptibility(0j)
    return Susceptibility(complex(1j * gamma / (gamma - 1j * detuning)))


@dataclass(frozen=True)
class WorkBreakdown:
    """Average work delivered by the photon, split into absorptive and reactive parts (hbar = 1)."""

    w_in: float
    w_abs: float
    w_reac: float

    def as_dict(self):
        return {"w_in": self.w_in, "w_abs": self.w_abs, "w_reac": self.w_reac}


def monochromatic_work(params: ModelParams, delta_pulse) -> WorkBreakdown:
    """Narrow-band asymptotics ``W_abs ~ 2 omega_L chi''`` and ``W_reac ~ Delta chi'``.

    Only meaningful for ``delta_pulse << gamma``; a warning is issued above ``gamma / 10``.
    """
    _check_rates(delta_pulse, params.gamma)
    if delta_pulse > params.gamma / 10:
        warnings.warn(
            f"monochromatic limit used outside its regime (Delta = {delta_pulse} > gamma/10)",
            RuntimeWarning,
            stacklevel=2,
        )
    chi = susceptibility(detunings(params).delta_LbJ, params.gamma)
    w_abs = 2.0 * params.omega_L * chi.chi_im
    w_reac = delta_pulse * chi.chi_re
    return WorkBreakdown(w_in=w_abs + w_reac, w_abs=w_abs, w_reac=w_reac)


def classical_oscillator_work(delta_pulse, omega_L, chi_c: Susceptibility):
    """Work done on a damped classical oscillator by a slowly decaying force."""
    return delta_pulse * chi_c.chi_re + 2.0 * omega_L * chi_c.chi_im


def closed_form_amplitude(t, delta_pulse, detuning, gamma=1.0):
    """Excited amplitude driven by an exponential pulse, carrier removed.

    Solves ``x' = -(gamma - i detuning) x - sqrt(gamma) u(t)`` with
    ``u = sqrt(Delta) exp(-Delta t / 2)`` from ``x(0) = 0``.  The lab-frame
    amplitude is ``x(t) exp(-i omega_L t)`` (times ``exp(-i delta_a0 t)`` on the
    replication branch).
    """
    _check_rates(delta_pulse, gamma)
    t = np.asarray(t, dtype=float)
    kappa = gamma - 1j * detuning - 0.5 * delta_pulse
    tt = np.maximum(t, 0.0)
    if kappa == 0:
        growth = tt + 0j
    else:
        growth = -np.expm1(-kappa * tt) / kappa
    x = -np.sqrt(gamma * delta_pulse) * np.exp(-0.5 * delta_pulse * tt) * growth
    return np.where(t > 0, x, 0.0)
