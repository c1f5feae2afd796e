"""Experiment configuration: YAML text in, validated objects out.

Every block rejects unknown keys.  After schema validation the physical
objects (parameters, pulse, gene, disorder) are built once so that invariant
violations surface at parse time with the offending block named.
"""
from __future__ import annotations

import itertools
from typing import Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .chain import DisorderSpec
from .exceptions import ConfigError, DomainError
from .params import DistanceProfile, GeneString, ModelParams
from .pulses import PulseSpec, pulse_from_dict

KINDS = ("analytic", "dynamics", "oracle", "chain", "sweep")
PARAM_AXES = ("gamma", "omega_b0", "delta_a0", "omega_L", "coupling_J")
PULSE_AXES = {"delta_pulse": "linewidth", "sigma": "sigma", "duration": "duration"}
SWEEP_AXES = PARAM_AXES + ("detuning",) + tuple(PULSE_AXES)


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ParamsBlock(_Block):
    gamma: float = 1.0
    omega_b0: float = 90.0
    delta_a0: float = 0.0
    omega_L: float = 100.0
    coupling_J: float | None = None
    detuning: float | None = Field(default=None, description="pulse detuning from the shifted transition; sets coupling_J")

    @model_validator(mode="after")
    def _one_of(self):
        if self.coupling_J is not None and self.detuning is not None:
            raise ValueError("give either coupling_J or detuning, not both")
        return self

    def build(self) -> ModelParams:
        base = ModelParams(gamma=self.gamma, omega_b0=self.omega_b0, delta_a0=self.delta_a0, omega_L=self.omega_L)
        if self.detuning is not None:
            return base.with_detuning(self.detuning)
        if self.coupling_J is not None:
            return base.replace(coupling_J=self.coupling_J)
        return base


class PulseBlock(_Block):
    shape: Literal["exponential", "gaussian", "rectangular", "sampled", "vacuum"] = "exponential"
    linewidth: float | None = None
    sigma: float | None = None
    center: float | None = None
    duration: float | None = None
    times: list[float] | None = None
    re: list[float] | None = None
    im: list[float] | None = None

    @model_validator(mode="after")
    def _required(self):
        need = {"exponential": ("linewidth",), "gaussian": ("sigma",), "rectangular": ("duration",), "sampled": ("times", "re")}
        for name in need.get(self.shape, ()):
            if getattr(self, name) is None:
                raise ValueError(f"{self.shape} pulse needs '{name}'")
        return self

    def build(self) -> PulseSpec:
        return pulse_from_dict(self.model_dump(exclude_none=True))


class GridBlock(_Block):
    dt: float | None = None
    t_max: float | None = None
    record_every: int | None = Field(default=None, ge=1)


class OracleBlock(_Block):
    n_modes: int = 4001
    halfwidth: float = 20.0
    dt: float | None = None
    t_max: float | None = None
    record_every: int = Field(default=20, ge=1)
    resolutions: list[tuple[int, float]] | None = None


class DisorderBlock(_Block):
    family: Literal["fixed", "log_uniform", "gamma"] = "fixed"
    delta: float | None = None
    low: float | None = None
    high: float | None = None
    shape: float | None = None


class ChainBlock(_Block):
    gene: str = "AB"
    distance: float = 1.0
    distances: list[float] | None = None
    J0: float = 10.0
    r0: float = 1.0
    disorder: DisorderBlock = DisorderBlock()
    trials: int = Field(default=1000, ge=1)
    accounting: Literal["expected", "event"] = "expected"
    trial_log: bool = False

    def gene_string(self) -> GeneString:
        return GeneString(self.gene)

    def profile(self) -> DistanceProfile:
        n = len(self.gene)
        if self.distances is not None:
            if len(self.distances) != n:
                raise DomainError(f"{len(self.distances)} distances for a gene of {n} bases")
            return DistanceProfile(tuple(self.distances), J0=self.J0, r0=self.r0)
        return DistanceProfile.uniform(n, self.distance, J0=self.J0, r0=self.r0)


class SweepBlock(_Block):
    base: Literal["analytic", "dynamics"] = "analytic"
    axes: dict[str, list[float]]

    @model_validator(mode="after")
    def _axes(self):
        if not self.axes:
            raise ValueError("a sweep needs at least one axis")
        for name, values in self.axes.items():
            if name not in SWEEP_AXES:
                raise ValueError(f"unknown sweep axis {name!r}; known axes: {', '.join(SWEEP_AXES)}")
            if not values:
                raise ValueError(f"sweep axis {name!r} is empty")
        if "coupling_J" in self.axes and "detuning" in self.axes:
            raise ValueError("sweep either coupling_J or detuning, not both")
        return self


class GatesBlock(_Block):
    conservation: float = 1e-6
    da_residual: float = 1e-3
    work_identity: float = 1e-6
    oracle_p_relative: float = 1e-2
    oracle_norm: float = 1e-8


class ExperimentConfig(_Block):
    kind: Literal["analytic", "dynamics", "oracle", "chain", "sweep"] | None = None
    params: ParamsBlock = ParamsBlock()
    pulse: PulseBlock = PulseBlock(linewidth=0.1)
    grid: GridBlock = GridBlock()
    branches: list[Literal["A", "B"]] = ["A", "B"]
    oracle: OracleBlock = OracleBlock()
    chain: ChainBlock = ChainBlock()
    sweep: SweepBlock | None = None
    gates: GatesBlock = GatesBlock()
    master_seed: int = 0
    threads: int = Field(default=1, ge=1)

    def model_params(self) -> ModelParams:
        return self.params.build()

    def pulse_spec(self) -> PulseSpec:
        return self.pulse.build()

    def disorder(self) -> DisorderSpec:
        d = self.chain.disorder
        delta = d.delta
        if delta is None:
            delta = self.pulse.linewidth if self.pulse.linewidth is not None else 0.1
        return DisorderSpec(family=d.family, delta=delta, low=d.low, high=d.high, shape=d.shape)

    def echo(self) -> dict:
        """Resolved config as written to the results; ``threads`` is left out because it never changes a result."""
        return self.model_dump(mode="json", exclude={"threads"})


def _format_validation(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        path = ".".join(str(p) for p in e["loc"]) or "<root>"
        if e["type"] == "extra_forbidden":
            lines.append(f"{path}: unknown key")
        else:
            lines.append(f"{path}: {e['msg']}")
    return "; ".join(lines)


def _check_physics(cfg: ExperimentConfig):
    for block, build in (
        ("params", cfg.model_params),
        ("pulse", cfg.pulse_spec),
        ("chain.disorder", cfg.disorder),
        ("chain.gene", cfg.chain.gene_string),
        ("chain.distances", cfg.chain.profile),
    ):
        try:
            build()
        except DomainError as exc:
            raise ConfigError(f"{block}: {exc}") from None
    if cfg.kind == "sweep" and cfg.sweep is None:
        raise ConfigError("sweep: a sweep experiment needs a 'sweep' block with axes")
    if cfg.kind == "sweep":
        pulse_axes = [a for a in cfg.sweep.axes if a in PULSE_AXES]
        want = {"delta_pulse": "exponential", "sigma": "gaussian", "duration": "rectangular"}
        for a in pulse_axes:
            if cfg.pulse.shape != want[a]:
                raise ConfigError(f"sweep.axes.{a}: only valid for a {want[a]} pulse, config has {cfg.pulse.shape}")
        if cfg.sweep.base == "analytic" and cfg.pulse.shape != "exponential":
            raise ConfigError("sweep.base: the closed form covers exponential pulses only")
    if cfg.kind == "analytic" and cfg.pulse.shape != "exponential":
        raise ConfigError("pulse.shape: the closed form covers exponential pulses only")


def parse_config(text: str, kind: str | None = None) -> ExperimentConfig:
    """Validate a YAML document; ``kind`` (from the command line) must agree with any ``kind`` key."""
    try:
        data = yaml.safe_load(text) if text and text.strip() else {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML: {exc}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("<root>: the config must be a mapping")
    if kind is not None:
        if kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {kind!r}")
        if data.get("kind") not in (None, kind):
            raise ConfigError(f"kind: config says {data['kind']!r} but {kind!r} was requested")
        data = {**data, "kind": kind}
    try:
        cfg = ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_validation(exc)) from None
    _check_physics(cfg)
    return cfg


def load_config(path, kind=None) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, kind)


def expand_sweep(cfg: ExperimentConfig):
    """Cartesian product of the sweep axes as a list of ``{axis: value}`` in row-major order."""
    names = list(cfg.sweep.axes)
    return [dict(zip(names, combo)) for combo in itertools.product(*(cfg.sweep.axes[n] for n in names))]


def point_objects(cfg: ExperimentConfig, point: dict):
    """``(ModelParams, PulseSpec)`` for one sweep point."""
    params_data = cfg.params.model_dump()
    pulse_data = cfg.pulse.model_dump(exclude_none=True)
    for name, value in point.items():
        if name in PULSE_AXES:
            pulse_data[PULSE_AXES[name]] = value
        else:
            params_data[name] = value
            if name == "coupling_J":
                params_data["detuning"] = None
            if name == "detuning":
                params_data["coupling_J"] = None
    try:
        return ParamsBlock(**params_data).build(), pulse_from_dict(pulse_data)
    except (DomainError, ValidationError) as exc:
        raise ConfigError(f"sweep point {point}: {exc}") from None
