"""Brute-force single-excitation dynamics on a discrete comb of field modes.

No Wigner-Weisskopf elimination: every ``b``-photon mode, the excited
amplitude and every ``a``-photon mode are integrated together.  This is the
independent check of :mod:`photorep.dynamics`.

Frames.  The excited amplitude is written in the same rotating frame as the
reduced solver.  ``b`` modes are labelled by their detuning ``nu`` from
``omega_L``; ``a`` modes by their detuning from the frequency that conserves
energy in the ``b -> a`` Raman transition (``omega_L + J - delta_a0`` on the
replication branch, ``omega_L - delta_a0`` on the mutation branch).  In these
variables both combs obey

    F_nu' = -i nu F_nu + g x,     A_nu' = -i nu A_nu + g x,
    x'    =  i delta x - g sum_nu (F_nu + A_nu),

and they are integrated with RK4 in the interaction picture of the free
mode rotation, which keeps the fast phases of the outer modes exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    TimeGrid,
    _check_branch,
    accumulate_probability,
    branch_detuning,
    evolve_branch,
)
from .exceptions import DomainError, GridError, IntegrationError
from .params import ModelParams
from .pulses import ExponentialPulse, PulseSpec

MIN_MODES = 401
MIN_HALFWIDTH = 10.0
NORM_FAILURE = 1e-6


@dataclass(frozen=True)
class ModeGrid:
    """Equally spaced comb of ``n_modes`` detunings spanning ``2 * halfwidth``."""

    nu: np.ndarray
    center: float
    rho: float
    g: float
    halfwidth: float
    gamma: float

    @property
    def n_modes(self):
        return self.nu.size

    @property
    def spacing(self):
        return 1.0 / self.rho

    @property
    def recurrence_time(self):
        """Time after which emitted light re-enters the emitter on the periodic comb."""
        return 2.0 * math.pi * self.rho


def build_mode_grid(gamma, omega_L, halfwidth, n_modes, pulse: PulseSpec | None = None, strict=True) -> ModeGrid:
    """Comb centred on ``omega_L`` with ``rho = n_modes / (2 halfwidth)`` and ``g = sqrt(gamma / (2 pi rho))``."""
    n_modes = int(n_modes)
    if n_modes % 2 != 1:
        raise GridError(f"number of modes must be odd so that one mode sits on omega_L, got {n_modes}")
    if strict and n_modes < MIN_MODES:
        raise GridError(f"need at least {MIN_MODES} modes, got {n_modes}")
    if not gamma > 0:
        raise DomainError("gamma must be > 0")
    if strict and halfwidth < MIN_HALFWIDTH * gamma:
        raise GridError(f"halfwidth must be >= {MIN_HALFWIDTH} gamma, got {halfwidth}")
    if pulse is not None and pulse.rate_scale > halfwidth / 5.0:
        raise GridError(
            f"pulse bandwidth ~{pulse.rate_scale:.3g} too close to the comb edge (halfwidth {halfwidth})"
        )
    rho = n_modes / (2.0 * halfwidth)
    nu = (np.arange(n_modes) - (n_modes - 1) / 2) / rho
    g = math.sqrt(gamma / (2.0 * math.pi * rho))
    return ModeGrid(nu=nu, center=float(omega_L), rho=rho, g=g, halfwidth=float(halfwidth), gamma=float(gamma))


def initial_photon(grid: ModeGrid, pulse: PulseSpec, renormalize=True):
    """Mode amplitudes of the incoming photon and the norm captured by the comb before renormalising."""
    phi = np.asarray(pulse.spectrum(grid.nu), dtype=complex) / math.sqrt(2.0 * math.pi * grid.rho)
    captured = float(np.vdot(phi, phi).real)
    if renormalize and captured > 0:
        phi = phi / math.sqrt(captured)
    return phi, captured


@dataclass(frozen=True)
class FullState:
    """Amplitudes at one instant (rotating frame, Schrodinger picture)."""

    t: float
    b_modes: np.ndarray
    excited: complex
    a_modes: np.ndarray
    branch: str

    @property
    def norm(self):
        return float(np.vdot(self.b_modes, self.b_modes).real + abs(self.excited) ** 2 + np.vdot(self.a_modes, self.a_modes).real)


def oracle_observables(state: FullState) -> dict:
    """Branch probabilities as mode sums.

    Branch "A": ``p_rep`` (photon in ``a`` modes), ``p_fail`` (photon still in
    ``b`` modes).  Branch "B": ``p_mut`` and ``p_dorm``.
    """
    p_a = float(np.vdot(state.a_modes, state.a_modes).real)
    p_b = float(np.vdot(state.b_modes, state.b_modes).real)
    excited = abs(state.excited) ** 2
    if state.branch == "A":
        out = {"p_rep": p_a, "p_fail": p_b}
    else:
        out = {"p_mut": p_a, "p_dorm": p_b}
    out["excited"] = excited
    out["norm"] = p_a + p_b + excited
    return out


@dataclass(frozen=True)
class OracleTrajectory:
    t: np.ndarray
    excited: np.ndarray
    p_a: np.ndarray
    p_b: np.ndarray
    norm: np.ndarray
    initial_norm: float
    captured_norm: float
    final: FullState
    grid: ModeGrid
    dt: float

    @property
    def norm_drift(self):
        return float(np.max(np.abs(self.norm - self.initial_norm)))

    def rows(self):
        return [
            (t, x.real, x.imag, pa, pb, abs(x) ** 2, n)
            for t, x, pa, pb, n in zip(self.t, self.excited, self.p_a, self.p_b, self.norm)
        ]


def integrate_full(
    grid: ModeGrid,
    params: ModelParams,
    pulse: PulseSpec,
    branch="A",
    dt=None,
    t_max=None,
    record_every=1,
    coupling_scale=1.0,
    strict=True,
    renormalize=True,
) -> OracleTrajectory:
    """Integrate the coupled mode equations from the incoming photon state.

    ``coupling_scale`` multiplies ``g`` (0 decouples emitter and field).
    ``renormalize`` rescales the truncated photon spectrum to unit norm; this
    raises the in-band weight by ``1 / captured_norm`` and so biases the
    absorption upward by roughly ``Delta / (pi halfwidth)`` for an
    exponential pulse.
    Raises :class:`IntegrationError` when the norm drifts by more than 1e-6.
    """
    branch = _check_branch(branch)
    delta = branch_detuning(params, branch)
    fastest = max(grid.halfwidth, abs(delta), params.gamma)
    if dt is None:
        dt = 0.1 / fastest
    if strict and dt * fastest > 0.1 + 1e-12:
        raise GridError(f"dt * max|frequency| = {dt * fastest:.3g} exceeds 0.1")
    if t_max is None:
        t_max = min(pulse.support_end(1e-10) + 30.0 / params.gamma, 0.9 * grid.recurrence_time)
    if strict and t_max >= grid.recurrence_time:
        raise GridError(
            f"t_max = {t_max:.4g} reaches the comb recurrence time {grid.recurrence_time:.4g}; add modes"
        )
    n = int(math.ceil(t_max / dt - 1e-9))
    M = grid.n_modes
    g = grid.g * coupling_scale

    phi, captured = initial_photon(grid, pulse, renormalize)
    y = np.zeros(2 * M + 1, dtype=complex)
    y[:M] = phi
    initial_norm = float(np.vdot(y, y).real)

    half = np.exp(0.5j * grid.nu * dt)
    phase = np.ones(M, dtype=complex)

    def rhs(e, y):
        out = np.empty_like(y)
        x = y[M]
        drive = g * x * e
        out[:M] = drive
        out[M + 1 :] = drive
        out[M] = 1j * delta * x - g * np.vdot(e, y[:M] + y[M + 1 :])
        return out

    n_rec = n // record_every + 1
    rec_t = np.empty(n_rec)
    rec_x = np.empty(n_rec, dtype=complex)
    rec_a = np.empty(n_rec)
    rec_b = np.empty(n_rec)

    def record(i, k, y):
        rec_t[i] = k * dt
        rec_x[i] = y[M]
        rec_b[i] = np.vdot(y[:M], y[:M]).real
        rec_a[i] = np.vdot(y[M + 1 :], y[M + 1 :]).real

    record(0, 0, y)
    i = 1
    for k in range(1, n + 1):
        e_mid = phase * half
        e_end = e_mid * half
        k1 = rhs(phase, y)
        k2 = rhs(e_mid, y + (0.5 * dt) * k1)
        k3 = rhs(e_mid, y + (0.5 * dt) * k2)
        k4 = rhs(e_end, y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if k % 1024 == 0:
            phase = np.exp(1j * grid.nu * (k * dt))
        else:
            phase = e_end
        if k % record_every == 0:
            record(i, k, y)
            i += 1
    rec_t, rec_x, rec_a, rec_b = rec_t[:i], rec_x[:i], rec_a[:i], rec_b[:i]
    norm = rec_a + rec_b + np.abs(rec_x) ** 2
    if not np.all(np.isfinite(norm)):
        raise IntegrationError("non-finite amplitudes in mode integration")
    drift = float(np.max(np.abs(norm - initial_norm)))
    if strict and drift > NORM_FAILURE:
        raise IntegrationError(f"norm drift {drift:.3g} exceeds {NORM_FAILURE}: reduce dt")

    t_end = n * dt
    back = np.exp(-1j * grid.nu * t_end)
    final = FullState(t=t_end, b_modes=y[:M] * back, excited=complex(y[M]), a_modes=y[M + 1 :] * back, branch=branch)
    return OracleTrajectory(
        t=rec_t,
        excited=rec_x,
        p_a=rec_a,
        p_b=rec_b,
        norm=norm,
        initial_norm=initial_norm,
        captured_norm=captured,
        final=final,
        grid=grid,
        dt=float(dt),
    )


@dataclass
class DiscrepancyRow:
    n_modes: int
    halfwidth: float
    rho: float
    dt: float
    t_max: float
    captured_norm: float
    norm_drift: float
    max_amp_deviation: float
    peak_relative_deviation: float
    p_oracle: float
    p_reduced: float
    p_relative_deviation: float
    p_closed_form: float | None = None

    def as_dict(self):
        return dict(self.__dict__)


@dataclass
class DiscrepancyTable:
    rows: list
    branch: str
    convergent: bool
    orders: list = field(default_factory=list)

    def to_dict(self):
        return {
            "branch": self.branch,
            "convergent": self.convergent,
            "orders": self.orders,
            "rows": [r.as_dict() for r in self.rows],
        }


@dataclass(frozen=True)
class Comparison:
    """Oracle against reduced dynamics on the same time nodes.

    ``max_amp_deviation`` is ``max_t |x_oracle - x_reduced|`` in units of the
    unit-normalised photon amplitude; ``peak_relative_deviation`` divides it
    by the peak of ``|x_reduced|``.  Both are dominated by the first
    ``~1/halfwidth`` of the run, where the band-limited comb cannot follow a
    sharp pulse front.
    """

    max_amp_deviation: float
    peak_relative_deviation: float
    p_oracle: float
    p_reduced: float


def compare_with_reduced(traj: OracleTrajectory, params: ModelParams, pulse: PulseSpec, branch="A") -> Comparison:
    red = evolve_branch(params, pulse, branch, TimeGrid(t_max=traj.t[-1], dt=traj.dt), strict=False)
    xr = np.interp(traj.t, red.t, red.amp.real) + 1j * np.interp(traj.t, red.t, red.amp.imag)
    dev = float(np.max(np.abs(traj.excited - xr)))
    peak = float(np.max(np.abs(xr)))
    return Comparison(
        max_amp_deviation=dev,
        peak_relative_deviation=dev / peak if peak > 0 else dev,
        p_oracle=float(traj.p_a[-1]) + accumulate_tail(traj),
        p_reduced=accumulate_probability(red).p_inf,
    )


def accumulate_tail(traj: OracleTrajectory):
    """Share of the remaining excitation that free decay sends into the ``a`` modes."""
    return 0.5 * abs(traj.excited[-1]) ** 2


def ww_discrepancy(
    params: ModelParams,
    pulse: PulseSpec,
    resolutions,
    branch="A",
    dt=None,
    t_max=None,
) -> DiscrepancyTable:
    """Oracle-versus-reduced deviations over a sequence of ``(n_modes, halfwidth)`` combs.

    Deviations must shrink along the sequence; otherwise ``convergent`` is
    False.  ``orders`` are the observed convergence exponents of the
    long-time probability deviation with respect to whichever of
    ``n_modes``/``halfwidth`` changes between consecutive entries.
    """
    resolutions = [(int(m), float(w)) for m, w in resolutions]
    if len(resolutions) < 2:
        raise DomainError("need at least two comb resolutions")
    closed = None
    if isinstance(pulse, ExponentialPulse):
        from .analytic import transition_probability

        closed = float(transition_probability(pulse.linewidth, branch_detuning(params, branch), params.gamma))
    rows = []
    for m, w in resolutions:
        grid = build_mode_grid(params.gamma, params.omega_L, w, m, pulse)
        traj = integrate_full(grid, params, pulse, branch, dt=dt, t_max=t_max)
        cmp = compare_with_reduced(traj, params, pulse, branch)
        p_or, p_red = cmp.p_oracle, cmp.p_reduced
        rows.append(
            DiscrepancyRow(
                n_modes=m,
                halfwidth=w,
                rho=grid.rho,
                dt=traj.dt,
                t_max=float(traj.t[-1]),
                captured_norm=traj.captured_norm,
                norm_drift=traj.norm_drift,
                max_amp_deviation=cmp.max_amp_deviation,
                peak_relative_deviation=cmp.peak_relative_deviation,
                p_oracle=p_or,
                p_reduced=p_red,
                p_relative_deviation=abs(p_or - p_red) / p_red if p_red > 0 else abs(p_or),
                p_closed_form=closed,
            )
        )
    convergent = True
    orders = []
    for a, b in zip(rows, rows[1:]):
        if b.p_relative_deviation >= a.p_relative_deviation and b.max_amp_deviation >= a.max_amp_deviation:
            convergent = False
        ratio = (b.n_modes / a.n_modes) if b.n_modes != a.n_modes else (b.halfwidth / a.halfwidth)
        if ratio != 1 and a.p_relative_deviation > 0 and b.p_relative_deviation > 0:
            orders.append(math.log(a.p_relative_deviation / b.p_relative_deviation) / math.log(ratio))
        else:
            orders.append(None)
    return DiscrepancyTable(rows=rows, branch=_check_branch(branch), convergent=convergent, orders=orders)
