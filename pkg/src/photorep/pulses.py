"""Single-photon wavepacket envelopes.

Every pulse is described by its temporal envelope ``u(t)`` as seen by the
emitter at ``z = 0``: the photon arrives at ``t = 0`` and

    integral |u(t)|^2 dt = 1.

This is the real-space normalisation ``(1/2 pi rho c) int |phi(z, 0)|^2 dz = 1``
written with ``z = -c t``: the field amplitude is ``phi(-ct, 0) =
sqrt(2 pi rho) u(t) exp(-i omega_L t)``.  The mode density ``rho`` and the
dipole coupling ``g`` only enter through ``gamma = 2 pi g^2 rho``, so the
drive of the excited amplitude is ``g phi(-ct, 0) = sqrt(gamma) u(t) exp(-i omega_L t)``.

``side`` arguments select one-sided limits at discontinuities: ``+1`` is the
limit from the right, ``-1`` from the left.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .exceptions import DomainError

NORM_RTOL = 1e-10


def _as_time(t):
    return np.asarray(t, dtype=float)


class PulseSpec:
    """Base class for pulse envelopes."""

    kind = "abstract"
    norm = 1.0

    def envelope(self, t, side=1):
        raise NotImplementedError

    def derivative(self, t, side=1):
        """Derivative of the envelope away from its jumps."""
        raise NotImplementedError

    def jumps(self):
        """``(time, u(t+) - u(t-))`` pairs for every discontinuity of ``u``."""
        return ()

    def breakpoints(self):
        """Times where ``u`` or its derivative is not smooth."""
        return tuple(t for t, _ in self.jumps())

    def tail_mass(self, t):
        """Photon probability that has not reached the emitter by time ``t``."""
        raise NotImplementedError

    def spectrum(self, nu):
        """Fourier amplitude ``int u(t) exp(i nu t) dt`` at detuning ``nu`` from the carrier."""
        raise NotImplementedError

    def support_end(self, tol=1e-12):
        """Time after which less than ``tol`` of the photon is still to arrive."""
        raise NotImplementedError

    @property
    def rate_scale(self):
        """Fastest time scale of the envelope (inverse time)."""
        raise NotImplementedError

    @property
    def effective_linewidth(self):
        """Reporting-only linewidth; never used inside the dynamics."""
        return self.rate_scale

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class ExponentialPulse(PulseSpec):
    """Photon spontaneously emitted by a distant source of linewidth ``linewidth``."""

    linewidth: float
    kind = "exponential"

    def __post_init__(self):
        if not (self.linewidth > 0 and np.isfinite(self.linewidth)):
            raise DomainError(f"pulse linewidth must be > 0, got {self.linewidth!r}")

    def envelope(self, t, side=1):
        t = _as_time(t)
        on = (t > 0) | ((t == 0) & (side > 0))
        return np.where(on, math.sqrt(self.linewidth) * np.exp(-0.5 * self.linewidth * np.maximum(t, 0.0)), 0.0) + 0j

    def derivative(self, t, side=1):
        return -0.5 * self.linewidth * self.envelope(t, side)

    def jumps(self):
        return ((0.0, complex(math.sqrt(self.linewidth))),)

    def tail_mass(self, t):
        t = _as_time(t)
        return np.where(t <= 0, 1.0, np.exp(-self.linewidth * np.maximum(t, 0.0)))

    def spectrum(self, nu):
        nu = np.asarray(nu, dtype=float)
        return math.sqrt(self.linewidth) / (0.5 * self.linewidth - 1j * nu)

    def support_end(self, tol=1e-12):
        return math.log(1.0 / tol) / self.linewidth

    @property
    def rate_scale(self):
        return self.linewidth

    def to_dict(self):
        return {"shape": "exponential", "linewidth": self.linewidth}


@dataclass(frozen=True)
class GaussianPulse(PulseSpec):
    """Gaussian intensity profile with rms duration ``sigma``, truncated before ``t = 0``.

    The intensity ``|u|^2`` is a normal density of standard deviation ``sigma``
    centred at ``center`` (default ``8 sigma``), cut at the causal front and
    renormalised.
    """

    sigma: float
    center: float | None = None
    kind = "gaussian"
    _amp: float = field(init=False, repr=False, compare=False)
    _kept: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (self.sigma > 0 and np.isfinite(self.sigma)):
            raise DomainError(f"gaussian sigma must be > 0, got {self.sigma!r}")
        if self.center is None:
            object.__setattr__(self, "center", 8.0 * self.sigma)
        if self.center < 0:
            raise DomainError("gaussian center must be >= 0")
        kept = float(ndtr(self.center / self.sigma))
        object.__setattr__(self, "_kept", kept)
        object.__setattr__(self, "_amp", (math.sqrt(2 * math.pi) * self.sigma * kept) ** -0.5)

    def envelope(self, t, side=1):
        t = _as_time(t)
        on = (t > 0) | ((t == 0) & (side > 0))
        s = (t - self.center) / (2 * self.sigma)
        return np.where(on, self._amp * np.exp(-s * s), 0.0) + 0j

    def derivative(self, t, side=1):
        t = _as_time(t)
        return -(t - self.center) / (2 * self.sigma**2) * self.envelope(t, side)

    def jumps(self):
        return ((0.0, complex(self.envelope(0.0, 1))),)

    def tail_mass(self, t):
        t = _as_time(t)
        return np.where(t <= 0, 1.0, ndtr((self.center - np.maximum(t, 0.0)) / self.sigma) / self._kept)

    def spectrum(self, nu):
        # untruncated transform; the truncated mass is below 1e-15 for the default center
        nu = np.asarray(nu, dtype=float)
        return self._amp * 2 * self.sigma * math.sqrt(math.pi) * np.exp(1j * nu * self.center - (self.sigma * nu) ** 2)

    def support_end(self, tol=1e-12):
        from scipy.special import ndtri

        return max(self.center - self.sigma * float(ndtri(tol * self._kept)), 0.0)

    @property
    def rate_scale(self):
        return 1.0 / self.sigma

    @property
    def effective_linewidth(self):
        # FWHM of the spectral intensity exp(-2 sigma^2 nu^2)
        return math.sqrt(2 * math.log(2)) / self.sigma

    def to_dict(self):
        return {"shape": "gaussian", "sigma": self.sigma, "center": self.center}


@dataclass(frozen=True)
class RectangularPulse(PulseSpec):
    """Flat envelope of length ``duration`` starting at ``t = 0``."""

    duration: float
    kind = "rectangular"

    def __post_init__(self):
        if not (self.duration > 0 and np.isfinite(self.duration)):
            raise DomainError(f"rectangular duration must be > 0, got {self.duration!r}")

    def envelope(self, t, side=1):
        t = _as_time(t)
        T = self.duration
        on = ((t > 0) | ((t == 0) & (side > 0))) & ((t < T) | ((t == T) & (side < 0)))
        return np.where(on, 1.0 / math.sqrt(T), 0.0) + 0j

    def derivative(self, t, side=1):
        return np.zeros(np.shape(t), dtype=complex)

    def jumps(self):
        a = complex(1.0 / math.sqrt(self.duration))
        return ((0.0, a), (self.duration, -a))

    def tail_mass(self, t):
        t = _as_time(t)
        return np.clip(1.0 - t / self.duration, 0.0, 1.0)

    def spectrum(self, nu):
        nu = np.asarray(nu, dtype=float)
        T = self.duration
        return math.sqrt(T) * np.exp(0.5j * nu * T) * np.sinc(nu * T / (2 * math.pi))

    def support_end(self, tol=1e-12):
        return self.duration

    @property
    def rate_scale(self):
        return 1.0 / self.duration

    @property
    def effective_linewidth(self):
        # first zero of the sinc spectrum
        return 2 * math.pi / self.duration

    def to_dict(self):
        return {"shape": "rectangular", "duration": self.duration}


def _segment_norms(times, values):
    h = np.diff(times)
    a, b = values[:-1], values[1:]
    return h * (np.abs(a) ** 2 + np.abs(b) ** 2 + np.real(a * np.conj(b))) / 3.0


@dataclass(frozen=True, eq=False)
class SampledPulse(PulseSpec):
    """Piecewise-linear envelope through ``(times, values)``; zero outside the samples.

    The norm is evaluated exactly for the linear interpolant.  Use
    :meth:`normalized` to rescale arbitrary samples.
    """

    times: np.ndarray
    values: np.ndarray
    kind = "sampled"
    _cum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        values = np.array(self.values, dtype=complex)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise DomainError("sampled pulse needs matching 1-D times and values (at least two samples)")
        if times[0] < 0:
            raise DomainError("sampled pulse must vanish before t = 0 (first sample time >= 0)")
        if np.any(np.diff(times) <= 0):
            raise DomainError("sample times must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise DomainError("sample values must be finite")
        seg = _segment_norms(times, values)
        total = float(seg.sum())
        if abs(total - 1.0) > NORM_RTOL:
            raise DomainError(f"sampled envelope is not normalised: integral |u|^2 = {total!r}")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_cum", np.concatenate([[0.0], np.cumsum(seg)]))

    @classmethod
    def normalized(cls, times, values):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=complex)
        total = float(_segment_norms(times, values).sum())
        if total <= 0:
            raise DomainError("cannot normalise an all-zero envelope")
        return cls(times, values / math.sqrt(total))

    def _interp(self, t):
        re = np.interp(t, self.times, self.values.real, left=0.0, right=0.0)
        im = np.interp(t, self.times, self.values.imag, left=0.0, right=0.0)
        return re + 1j * im

    def envelope(self, t, side=1):
        t = _as_time(t)
        out = self._interp(t)
        t0, t1 = self.times[0], self.times[-1]
        out = np.where((t == t0) & (side < 0), 0.0, out)
        out = np.where((t == t1) & (side > 0), 0.0, out)
        return out + 0j

    def derivative(self, t, side=1):
        t = _as_time(t)
        slopes = np.diff(self.values) / np.diff(self.times)
        if side > 0:
            idx = np.searchsorted(self.times, t, side="right") - 1
        else:
            idx = np.searchsorted(self.times, t, side="left") - 1
        inside = (idx >= 0) & (idx < slopes.size)
        return np.where(inside, slopes[np.clip(idx, 0, slopes.size - 1)], 0.0) + 0j

    def jumps(self):
        out = []
        if self.values[0] != 0:
            out.append((float(self.times[0]), complex(self.values[0])))
        if self.values[-1] != 0:
            out.append((float(self.times[-1]), complex(-self.values[-1])))
        return tuple(out)

    def breakpoints(self):
        return tuple(float(x) for x in self.times)

    def tail_mass(self, t):
        t = np.atleast_1d(_as_time(t))
        out = np.empty(t.shape)
        for i, ti in enumerate(t):
            if ti <= self.times[0]:
                out[i] = 1.0
            elif ti >= self.times[-1]:
                out[i] = 0.0
            else:
                k = int(np.searchsorted(self.times, ti, side="right") - 1)
                a = self.values[k]
                b = self._interp(ti)
                part = _segment_norms(np.array([self.times[k], ti]), np.array([a, b]))[0]
                out[i] = 1.0 - (self._cum[k] + part)
        return out if np.ndim(t) else out[0]

    def spectrum(self, nu, oversample=16):
        nu = np.atleast_1d(np.asarray(nu, dtype=float))
        fine = np.linspace(self.times[0], self.times[-1], oversample * (self.times.size - 1) + 1)
        u = self._interp(fine)
        w = np.full(fine.size, fine[1] - fine[0])
        w[0] = w[-1] = 0.5 * w[0]
        return np.exp(1j * np.outer(nu, fine)) @ (w * u)

    def support_end(self, tol=1e-12):
        return float(self.times[-1])

    @property
    def rate_scale(self):
        return 1.0 / float(np.min(np.diff(self.times)))

    @property
    def effective_linewidth(self):
        t = self.times
        w = _segment_norms(t, self.values)
        mid = 0.5 * (t[:-1] + t[1:])
        mean = np.sum(w * mid)
        rms = math.sqrt(max(np.sum(w * (mid - mean) ** 2), 1e-300))
        return 1.0 / rms

    def to_dict(self):
        return {
            "shape": "sampled",
            "times": self.times.tolist(),
            "re": self.values.real.tolist(),
            "im": self.values.imag.tolist(),
        }


@dataclass(frozen=True)
class VacuumPulse(PulseSpec):
    """No photon at all; every amplitude stays zero."""

    kind = "vacuum"
    norm = 0.0

    def envelope(self, t, side=1):
        return np.zeros(np.shape(t), dtype=complex)

    def derivative(self, t, side=1):
        return np.zeros(np.shape(t), dtype=complex)

    def tail_mass(self, t):
        return np.zeros(np.shape(t))

    def spectrum(self, nu):
        return np.zeros(np.shape(nu), dtype=complex)

    def support_end(self, tol=1e-12):
        return 0.0

    @property
    def rate_scale(self):
        return 0.0

    @property
    def effective_linewidth(self):
        return 0.0

    def to_dict(self):
        return {"shape": "vacuum"}


def pulse_drive(pulse: PulseSpec, omega_L, t, gamma=1.0, side=1):
    """Drive ``g F(-ct, 0)`` of the excited amplitude, carrier included.

    For an exponential pulse this is ``sqrt(gamma * Delta) exp(-Delta t / 2 - i omega_L t)``
    for ``t >= 0`` and zero before the photon arrives.
    """
    t = _as_time(t)
    return math.sqrt(gamma) * pulse.envelope(t, side) * np.exp(-1j * omega_L * t)


def pulse_from_dict(spec: dict) -> PulseSpec:
    spec = dict(spec)
    shape = spec.pop("shape", "exponential")
    if shape == "exponential":
        return ExponentialPulse(linewidth=float(spec["linewidth"]))
    if shape == "gaussian":
        center = spec.get("center")
        return GaussianPulse(sigma=float(spec["sigma"]), center=None if center is None else float(center))
    if shape == "rectangular":
        return RectangularPulse(duration=float(spec["duration"]))
    if shape == "sampled":
        values = np.asarray(spec["re"], dtype=float) + 1j * np.asarray(spec.get("im") or np.zeros(len(spec["re"])), dtype=float)
        return SampledPulse(np.asarray(spec["times"], dtype=float), values)
    if shape == "vacuum":
        return VacuumPulse()
    raise DomainError(f"unknown pulse shape {shape!r}")
