"""Wigner-Weisskopf amplitude dynamics for one environment base.

Both branches reduce to one driven, damped amplitude.  With the optical carrier
removed, the slowly varying amplitude ``x`` obeys

    x' = -(gamma - i delta) x - sqrt(gamma) u(t),     x(0) = 0,

where ``u`` is the unit-normalised pulse envelope and ``delta`` is the pulse
detuning from the relevant transition: ``delta_{L-bJ}`` on the replication
branch (gene base ``a``, shifted transition) and ``delta_{L-b}`` on the
mutation branch (gene base ``b``).  The lab-frame excited amplitudes are

    R_e(t) = x(t) exp(-i (omega_L + delta_a0) t)      (branch "A")
    M_e(t) = x(t) exp(-i omega_L t)                   (branch "B")

The ``exp(-i delta_a0 t)`` factor comes from the free evolution of the
``b``-photon modes on the replication branch (they sit on top of the gene
base energy ``delta_a0``), so ``delta_a0`` only dephases and never changes a
probability.

Integration uses classical RK4 on a half-step grid; Simpson panels built from
node and half-node values give fourth-order probability and work integrals.
Pulse discontinuities are placed on grid nodes and evaluated one-sidedly.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .analytic import WorkBreakdown
from .exceptions import ConvergenceError, DomainError, GridError, IntegrationError
from .integrate import integrate_linear_scalar
from .params import ModelParams, detunings
from .pulses import PulseSpec

BRANCHES = ("A", "B")
MAX_PHASE_PER_STEP = 0.1
DEFAULT_PHASE_PER_STEP = 0.05


def _check_branch(branch):
    branch = str(branch).upper()
    if branch not in BRANCHES:
        raise DomainError(f"branch must be 'A' (gene base a) or 'B' (gene base b), got {branch!r}")
    return branch


def branch_detuning(params: ModelParams, branch):
    d = detunings(params)
    return d.delta_LbJ if _check_branch(branch) == "A" else d.delta_Lb


def frame_frequency(params: ModelParams, branch):
    """Frequency of the carrier removed from the excited amplitude."""
    if _check_branch(branch) == "A":
        return params.omega_L + params.delta_a0
    return params.omega_L


@dataclass(frozen=True)
class TimeGrid:
    """Requested integration grid; ``None`` entries are chosen automatically."""

    t_max: float | None = None
    dt: float | None = None


def resolve_grid(params: ModelParams, pulse: PulseSpec, branch="A", grid: TimeGrid | None = None):
    """Return ``(dt, n_steps)`` with pulse discontinuities on grid nodes."""
    grid = grid or TimeGrid()
    delta = branch_detuning(params, branch)
    scale = max(params.gamma, abs(delta), pulse.rate_scale)
    dt = float(grid.dt) if grid.dt is not None else DEFAULT_PHASE_PER_STEP / scale
    if not dt > 0:
        raise GridError(f"dt must be > 0, got {dt!r}")
    inner = [tj for tj, _ in pulse.jumps() if tj > 0]
    if inner:
        tj = max(inner)
        dt = tj / math.ceil(tj / dt - 1e-9)
    if grid.t_max is not None:
        t_max = float(grid.t_max)
    else:
        t_max = pulse.support_end(1e-13) + 40.0 / params.gamma
    if not t_max > 0:
        raise GridError(f"t_max must be > 0, got {t_max!r}")
    n = int(math.ceil(t_max / dt - 1e-9))
    return dt, max(n, 1)


def _snap(times, breakpoints, dt):
    """Put times within rounding distance of a breakpoint exactly on it."""
    times = times.copy()
    for tb in breakpoints:
        k = int(round(tb / dt))
        if 0 <= k < times.size and abs(times[k] - tb) < 1e-9 * dt:
            times[k] = tb
    return times


def _misaligned(breakpoints, dt, t_max):
    out = []
    for tb, _ in breakpoints:
        if 0 < tb < t_max and abs(tb / dt - round(tb / dt)) > 1e-9:
            out.append(tb)
    return out


@dataclass(frozen=True)
class AmplitudeSeries:
    """Excited amplitude on a uniform grid, carrier removed.

    ``amp`` holds node values and ``amp_mid`` the values halfway between nodes.
    ``frame_frequency`` is the removed carrier: ``lab_amplitude()`` restores it.
    """

    t: np.ndarray
    amp: np.ndarray
    amp_mid: np.ndarray
    branch: str
    detuning: float
    gamma: float
    frame_frequency: float
    dt: float

    @property
    def t_max(self):
        return float(self.t[-1])

    @property
    def t_mid(self):
        return self.t[:-1] + 0.5 * self.dt

    def lab_amplitude(self):
        return self.amp * np.exp(-1j * self.frame_frequency * self.t)

    def derivative(self, drive_start, drive_mid, drive_end):
        """Time derivative of ``x`` from the equation of motion at start, midpoint, end of each panel."""
        lam = -(self.gamma - 1j * self.detuning)
        root = math.sqrt(self.gamma)
        return (
            lam * self.amp[:-1] - root * drive_start,
            lam * self.amp_mid - root * drive_mid,
            lam * self.amp[1:] - root * drive_end,
        )


def _panel_drive(pulse, series):
    """Envelope at (start+, mid, end-) of every panel."""
    t = _snap(series.t, pulse.breakpoints(), series.dt)
    return pulse.envelope(t[:-1], 1), pulse.envelope(series.t_mid, 1), pulse.envelope(t[1:], -1)


def _simpson_panels(f_start, f_mid, f_end, dt):
    return (dt / 6.0) * (f_start + 4.0 * f_mid + f_end)


def evolve_branch(
    params: ModelParams,
    pulse: PulseSpec,
    branch="A",
    grid: TimeGrid | None = None,
    strict=True,
) -> AmplitudeSeries:
    """Integrate the excited amplitude of one branch.

    Raises :class:`GridError` when the phase advance per step exceeds 0.1 rad,
    unless ``strict`` is false (used for step-size diagnostics).
    """
    branch = _check_branch(branch)
    delta = branch_detuning(params, branch)
    dt, n = resolve_grid(params, pulse, branch, grid)
    advance = max(abs(delta), params.gamma) * dt
    if strict and advance > MAX_PHASE_PER_STEP:
        raise GridError(
            f"grid too coarse: phase advance per step {advance:.3g} rad exceeds {MAX_PHASE_PER_STEP}"
        )
    bad = _misaligned(pulse.jumps(), dt, n * dt)
    if bad:
        warnings.warn(f"pulse discontinuities at {bad} are not on grid nodes", RuntimeWarning, stacklevel=2)

    h = 0.5 * dt
    tau = _snap(np.arange(2 * n + 1) * h, pulse.breakpoints(), h)
    root = math.sqrt(params.gamma)
    f_start = -root * pulse.envelope(tau[:-1], 1)
    f_mid = -root * pulse.envelope(tau[:-1] + 0.5 * h, 1)
    f_end = -root * pulse.envelope(tau[1:], -1)
    y = integrate_linear_scalar(-(params.gamma - 1j * delta), h, f_start, f_mid, f_end)
    if not np.all(np.isfinite(y)):
        raise IntegrationError("non-finite amplitude encountered")

    t = np.arange(n + 1) * dt
    return AmplitudeSeries(
        t=t,
        amp=y[::2].copy(),
        amp_mid=y[1::2].copy(),
        branch=branch,
        detuning=float(delta),
        gamma=float(params.gamma),
        frame_frequency=float(frame_frequency(params, branch)),
        dt=float(dt),
    )


@dataclass(frozen=True)
class ProbabilityCurve:
    """Emitted-photon probability ``gamma int_0^t |amp|^2`` and its long-time value."""

    t: np.ndarray
    p: np.ndarray
    tail: float
    tail_rate: float

    @property
    def p_final(self):
        return float(self.p[-1])

    @property
    def p_inf(self):
        return float(self.p[-1] + self.tail)


def _tail_estimate(series: AmplitudeSeries, gamma):
    a2 = np.abs(series.amp) ** 2
    last = a2[-1]
    if last == 0.0:
        return 0.0, 2.0 * gamma
    w = max(2, series.t.size // 20)
    w = min(w, series.t.size - 1)
    prev = a2[-1 - w]
    span = series.t[-1] - series.t[-1 - w]
    rate = math.log(prev / last) / span if prev > 0 and span > 0 else float("nan")
    if not (np.isfinite(rate) and rate > 0):
        rate = 2.0 * gamma
    rate = min(rate, 2.0 * gamma)
    return gamma * last / rate, rate


def accumulate_probability(series: AmplitudeSeries, gamma=None) -> ProbabilityCurve:
    """Cumulative Simpson quadrature of ``gamma |amp|^2`` with an exponential tail beyond ``t_max``.

    On branch "A" this is the replication probability, on branch "B" the
    mutation probability.
    """
    gamma = series.gamma if gamma is None else float(gamma)
    a2 = np.abs(series.amp) ** 2
    m2 = np.abs(series.amp_mid) ** 2
    inc = gamma * _simpson_panels(a2[:-1], m2, a2[1:], series.dt)
    p = np.concatenate([[0.0], np.cumsum(inc)])
    if np.any(np.diff(p) < 0) or not np.all(np.isfinite(p)):
        raise IntegrationError("accumulated probability is not monotone")
    tail, rate = _tail_estimate(series, gamma)
    return ProbabilityCurve(t=series.t, p=p, tail=float(tail), tail_rate=float(rate))


@dataclass(frozen=True)
class FieldProfiles:
    """Real-space photon amplitudes at time ``t``, divided by ``sqrt(2 pi rho)``.

    With this scaling ``int |profile|^2 dz`` is directly a probability.
    ``transmitted`` is ``F`` (branch A) or ``D`` (branch B), the photon left in
    the ``b`` modes; ``emitted`` is ``R_a`` or ``M_a``, the photon in the ``a``
    modes.
    """

    t: float
    z: np.ndarray
    transmitted: np.ndarray
    emitted: np.ndarray
    split: int = 0
    transmitted_front: complex = 0j

    def norms(self):
        """``(transmitted, emitted)`` probabilities.

        Both fields jump at the emitter (``z = 0``), so the two sides are
        integrated separately; ``transmitted_front`` is the limit from ``z < 0``.
        """
        from scipy.integrate import simpson

        def side(values, front):
            out = float(simpson(np.abs(values[self.split :]) ** 2, x=self.z[self.split :])) if self.z.size - self.split > 1 else 0.0
            if self.split:
                zb = np.append(self.z[: self.split], 0.0)
                vb = np.append(values[: self.split], front)
                out += float(simpson(np.abs(vb) ** 2, x=zb))
            return out

        return side(self.transmitted, self.transmitted_front), side(self.emitted, 0.0)


def field_profiles(series: AmplitudeSeries, pulse: PulseSpec, params: ModelParams, t, z_behind=None) -> FieldProfiles:
    """Photon profiles ``F/D(z, t)`` and ``R_a/M_a(z, t)`` sampled on the time grid spacing.

    ``z`` runs from ``-z_behind`` (default: the part of the pulse still to
    arrive) up to ``c t``; the emitted field vanishes outside ``0 <= z <= c t``.
    """
    k = int(round(t / series.dt))
    if k < 0 or k >= series.t.size or abs(series.t[k] - t) > 1e-9 * max(series.dt, 1.0):
        raise DomainError(f"t = {t} is not a node of the time grid")
    t = float(series.t[k])
    dt = series.dt
    if z_behind is None:
        z_behind = max(pulse.support_end(1e-14) - t, 0.0)
    m = int(math.ceil(z_behind / dt - 1e-9))
    z_in = -dt * np.arange(m, 0, -1)
    z_out = t - series.t[k::-1]
    z = np.concatenate([z_in, z_out])

    s_out = series.t[k::-1]
    x_out = series.amp[k::-1]
    lab = x_out * np.exp(-1j * series.frame_frequency * s_out)
    root = math.sqrt(series.gamma)
    incoming = pulse.envelope(t - z, 1) * np.exp(-1j * params.omega_L * (t - z))
    emission = np.zeros(z.shape, dtype=complex)
    emission[m:] = root * lab

    front = complex(pulse.envelope(t, -1) * np.exp(-1j * params.omega_L * t))
    if series.branch == "A":
        transmitted = incoming * np.exp(-1j * params.delta_a0 * t) + emission * np.exp(-1j * params.delta_a0 * z)
        emitted = emission * np.exp(-1j * (2 * params.delta_a0 - params.coupling_J) * z)
        front *= np.exp(-1j * params.delta_a0 * t)
    else:
        transmitted = incoming + emission
        emitted = emission * np.exp(-1j * params.delta_a0 * z)
    return FieldProfiles(t=t, z=z, transmitted=transmitted, emitted=emitted, split=m, transmitted_front=front)


@dataclass(frozen=True)
class ProbabilityBudget:
    """Where the photon is at every grid time."""

    t: np.ndarray
    remaining: np.ndarray
    transmitted: np.ndarray
    excited: np.ndarray
    emitted: np.ndarray
    initial: float

    @property
    def total(self):
        return self.remaining + self.transmitted + self.excited + self.emitted

    @property
    def residual(self):
        return np.abs(self.initial - self.total)


def probability_budget(series: AmplitudeSeries, pulse: PulseSpec) -> ProbabilityBudget:
    """Photon still incoming, passed the emitter in ``b`` modes, stored, and emitted in ``a`` modes.

    The transmitted part is the real-space norm of ``F`` (or ``D``) over
    ``0 <= z <= ct``, written as a time integral of ``|u + sqrt(gamma) x|^2``
    at the retarded time; the incoming part is the norm over ``z < 0``.
    """
    root = math.sqrt(series.gamma)
    u0, um, u1 = _panel_drive(pulse, series)
    out0 = np.abs(u0 + root * series.amp[:-1]) ** 2
    outm = np.abs(um + root * series.amp_mid) ** 2
    out1 = np.abs(u1 + root * series.amp[1:]) ** 2
    transmitted = np.concatenate([[0.0], np.cumsum(_simpson_panels(out0, outm, out1, series.dt))])
    emitted = accumulate_probability(series).p
    return ProbabilityBudget(
        t=series.t,
        remaining=np.asarray(pulse.tail_mass(series.t), dtype=float),
        transmitted=transmitted,
        excited=np.abs(series.amp) ** 2,
        emitted=emitted,
        initial=float(pulse.norm),
    )


def conservation_residual(series: AmplitudeSeries, pulse: PulseSpec, params: ModelParams | None = None, t=None):
    """``|1 - (incoming + transmitted + excited + emitted)|`` at every grid time, or at ``t``.

    For the vacuum the reference norm is zero.
    """
    res = probability_budget(series, pulse).residual
    if t is None:
        return res
    k = int(round(t / series.dt))
    if k < 0 or k >= series.t.size:
        raise DomainError(f"t = {t} outside the grid")
    return float(res[k])


@dataclass(frozen=True)
class WorkResult:
    """Work integrals over ``[0, t_max]``.

    ``breakdown`` holds the absorptive and reactive parts with
    ``w_in = w_abs + w_reac``.  ``w_in_direct`` is the incoming work evaluated
    independently from the dipole derivative (integration by parts), so
    ``identity_residual`` checks the reactive integral and its jump terms.
    """

    breakdown: WorkBreakdown
    w_in_direct: float
    identity_residual: float
    jump_times: tuple
    misaligned_jumps: tuple

    @property
    def w_abs(self):
        return self.breakdown.w_abs

    @property
    def w_reac(self):
        return self.breakdown.w_reac

    @property
    def w_in(self):
        return self.breakdown.w_in


def _absorbed_quanta(series, u0, um, u1):
    """``-sqrt(gamma) int Re[x* u] dt``, i.e. ``w_abs / (2 omega_L)``."""
    root = math.sqrt(series.gamma)
    f0 = np.real(np.conj(series.amp[:-1]) * u0)
    fm = np.real(np.conj(series.amp_mid) * um)
    f1 = np.real(np.conj(series.amp[1:]) * u1)
    return -root * float(np.sum(_simpson_panels(f0, fm, f1, series.dt)))


def work_breakdown(series: AmplitudeSeries, pulse: PulseSpec, params: ModelParams) -> WorkResult:
    """Average work taken from the photon along the run (hbar = 1).

    ``w_abs = -2 omega_L sqrt(gamma) int Re[x* u] dt`` and
    ``w_reac = -2 sqrt(gamma) int Re[i x* du]``, where ``du`` includes the
    jumps of the envelope (Stieltjes sum at the discontinuities).  Intended
    for the replication branch; on branch "B" the same formulas give the work
    absorbed along a mutation.
    """
    root = math.sqrt(series.gamma)
    omega_L = params.omega_L
    u0, um, u1 = _panel_drive(pulse, series)

    quanta = _absorbed_quanta(series, u0, um, u1)
    w_abs = 2.0 * omega_L * quanta

    t_snap = _snap(series.t, pulse.breakpoints(), series.dt)
    d0 = pulse.derivative(t_snap[:-1], 1)
    dm = pulse.derivative(series.t_mid, 1)
    d1 = pulse.derivative(t_snap[1:], -1)
    g0 = np.real(1j * np.conj(series.amp[:-1]) * d0)
    gm = np.real(1j * np.conj(series.amp_mid) * dm)
    g1 = np.real(1j * np.conj(series.amp[1:]) * d1)
    w_reac = -2.0 * root * float(np.sum(_simpson_panels(g0, gm, g1, series.dt)))

    jumps, misaligned = [], []
    for tj, du in pulse.jumps():
        if tj < 0 or tj > series.t_max:
            continue
        pos = tj / series.dt
        k = int(round(pos))
        if abs(pos - k) < 1e-9:
            xj = series.amp[k]
        else:
            misaligned.append(tj)
            xj = np.interp(tj, series.t, series.amp.real) + 1j * np.interp(tj, series.t, series.amp.imag)
        jumps.append(tj)
        w_reac += -2.0 * root * float(np.real(1j * np.conj(xj) * du))

    x0, xm, x1 = series.derivative(u0, um, u1)
    h0 = np.real((1j * np.conj(x0) - omega_L * np.conj(series.amp[:-1])) * u0)
    hm = np.real((1j * np.conj(xm) - omega_L * np.conj(series.amp_mid)) * um)
    h1 = np.real((1j * np.conj(x1) - omega_L * np.conj(series.amp[1:])) * u1)
    u_end = pulse.envelope(series.t_max, -1)
    boundary = -2.0 * root * float(np.real(1j * np.conj(series.amp[-1]) * u_end))
    w_in_direct = boundary + 2.0 * root * float(np.sum(_simpson_panels(h0, hm, h1, series.dt)))

    w_in = w_abs + w_reac
    scale = max(abs(w_in_direct), abs(w_abs), abs(w_reac), 1e-300)
    residual = abs(w_in_direct - w_in) / scale if (w_in_direct or w_in) else 0.0
    return WorkResult(
        breakdown=WorkBreakdown(w_in=w_in, w_abs=w_abs, w_reac=w_reac),
        w_in_direct=w_in_direct,
        identity_residual=residual,
        jump_times=tuple(jumps),
        misaligned_jumps=tuple(misaligned),
    )


@dataclass(frozen=True)
class AdaptationCheck:
    """Both sides of ``p(inf) = <W_abs> / (2 hbar omega_L)``, computed independently."""

    p_emitted: float
    absorbed_quanta: float
    w_abs: float
    residual: float
    final_amplitude: float
    tail: float


def da_residual(
    params: ModelParams,
    pulse: PulseSpec,
    grid: TimeGrid | None = None,
    branch="A",
    converged_tol=1e-6,
    series: AmplitudeSeries | None = None,
) -> AdaptationCheck:
    """Residual of the dissipative-adaptation identity for one run.

    The left side is ``gamma int |x|^2``; the right side is the absorptive work
    integral divided by ``2 omega_L`` (evaluated without the ``omega_L``
    factor so that it stays defined at ``omega_L = 0``).  Refuses runs where
    the excited amplitude has not decayed below ``converged_tol``.
    """
    if series is None:
        series = evolve_branch(params, pulse, branch, grid)
    final = float(abs(series.amp[-1]))
    curve = accumulate_probability(series)
    if final >= converged_tol:
        raise ConvergenceError(
            f"excited amplitude {final:.3g} at t_max = {series.t_max:.4g} has not decayed below {converged_tol}; "
            f"estimated tail mass {curve.tail:.3g}",
            tail_mass=curve.tail,
        )
    quanta = _absorbed_quanta(series, *_panel_drive(pulse, series))
    p = curve.p_final
    return AdaptationCheck(
        p_emitted=p,
        absorbed_quanta=quanta,
        w_abs=2.0 * params.omega_L * quanta,
        residual=abs(p - quanta),
        final_amplitude=final,
        tail=curve.tail,
    )


@dataclass(frozen=True)
class StepHalvingReport:
    dt: float
    p_coarse: float
    p_fine: float
    max_amp_difference: float

    @property
    def p_error(self):
        # Richardson estimate for a fourth-order method
        return abs(self.p_fine - self.p_coarse) / 15.0


def step_halving_check(params: ModelParams, pulse: PulseSpec, branch="A", grid: TimeGrid | None = None) -> StepHalvingReport:
    """Compare a run with the same run at half the step."""
    dt, n = resolve_grid(params, pulse, branch, grid)
    coarse = evolve_branch(params, pulse, branch, TimeGrid(t_max=n * dt, dt=dt))
    fine = evolve_branch(params, pulse, branch, TimeGrid(t_max=n * dt, dt=0.5 * dt))
    diff = np.max(np.abs(fine.amp[::2] - coarse.amp))
    return StepHalvingReport(
        dt=dt,
        p_coarse=accumulate_probability(coarse).p_final,
        p_fine=accumulate_probability(fine).p_final,
        max_amp_difference=float(diff),
    )
