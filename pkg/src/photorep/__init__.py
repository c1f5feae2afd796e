"""Single-photon driven replication of a chain of lambda systems.

Closed forms (:mod:`.analytic`), reduced amplitude dynamics (:mod:`.dynamics`),
a mode-resolved oracle (:mod:`.modes`), Monte Carlo gene copying
(:mod:`.chain`) and a configuration driven command line (:mod:`.cli`).
"""
__version__ = "0.1.0"

from .analytic import (
    BranchProbabilities,
    Susceptibility,
    WorkBreakdown,
    branch_probabilities,
    classical_oscillator_work,
    closed_form_amplitude,
    monochromatic_work,
    susceptibility,
    transition_probability,
)
from .chain import DisorderSpec, EnsembleStats, OutcomeRecord, base_probabilities, ensemble_stats, replicate_gene
from .dynamics import (
    TimeGrid,
    accumulate_probability,
    conservation_residual,
    da_residual,
    evolve_branch,
    field_profiles,
    work_breakdown,
)
from .exceptions import ConfigError, ConvergenceError, DomainError, GridError, IntegrationError
from .modes import build_mode_grid, integrate_full, oracle_observables, ww_discrepancy
from .params import DistanceProfile, GeneString, ModelParams, coupling_from_distance, detunings
from .pulses import ExponentialPulse, GaussianPulse, RectangularPulse, SampledPulse, VacuumPulse

__all__ = [
    "BranchProbabilities",
    "ConfigError",
    "ConvergenceError",
    "DisorderSpec",
    "DistanceProfile",
    "DomainError",
    "EnsembleStats",
    "ExponentialPulse",
    "GaussianPulse",
    "GeneString",
    "GridError",
    "IntegrationError",
    "ModelParams",
    "OutcomeRecord",
    "RectangularPulse",
    "SampledPulse",
    "Susceptibility",
    "TimeGrid",
    "VacuumPulse",
    "WorkBreakdown",
    "accumulate_probability",
    "base_probabilities",
    "branch_probabilities",
    "build_mode_grid",
    "classical_oscillator_work",
    "closed_form_amplitude",
    "conservation_residual",
    "coupling_from_distance",
    "da_residual",
    "detunings",
    "ensemble_stats",
    "evolve_branch",
    "field_profiles",
    "integrate_full",
    "monochromatic_work",
    "oracle_observables",
    "replicate_gene",
    "susceptibility",
    "transition_probability",
    "work_breakdown",
    "ww_discrepancy",
]
