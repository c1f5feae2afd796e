"""Physical parameters, detunings and gene data.

Natural units throughout: hbar = c = 1, and frequencies are usually quoted in
units of the decay rate ``gamma`` (default 1).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError


@dataclass(frozen=True)
class ModelParams:
    """Constants of one gene-base / environment-base / field problem.

    The defaults put the photon 10 linewidths above the bare b->e transition
    and choose ``coupling_J`` so that a gene base in state ``a`` brings the
    environment base exactly into resonance.  They are a convenient working
    point, not values fixed by the model.
    """

    gamma: float = 1.0
    omega_b0: float = 90.0
    delta_a0: float = 0.0
    omega_L: float = 100.0
    coupling_J: float = 10.0

    def __post_init__(self):
        for name in ("gamma", "omega_b0", "delta_a0", "omega_L", "coupling_J"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
        if self.gamma <= 0:
            raise DomainError(f"gamma must be > 0, got {self.gamma}")
        if self.omega_L < 0 or self.omega_b0 < 0:
            raise DomainError("omega_L and omega_b0 are frequencies and must be >= 0")
        if self.delta_a0 > self.omega_b0:
            raise DomainError(
                f"delta_a0 ({self.delta_a0}) must not exceed omega_b0 ({self.omega_b0}): "
                "level a lies below the excited level"
            )

    @property
    def omega_bJ(self):
        """Shifted b->e transition frequency seen when the gene base is in ``a``."""
        return self.omega_b0 + self.coupling_J

    def replace(self, **changes):
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        values.update(changes)
        return ModelParams(**values)

    def with_detuning(self, detuning):
        """Copy with ``coupling_J`` chosen so that delta_{L-bJ} equals ``detuning``."""
        return self.replace(coupling_J=self.omega_L - self.omega_b0 - detuning)

    def as_dict(self):
        return {k: float(getattr(self, k)) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class Detunings:
    delta_LbJ: float
    delta_Lb: float


def detunings(params: ModelParams) -> Detunings:
    """Pulse detunings from the shifted and the bare b->e transitions."""
    delta_Lb = params.omega_L - params.omega_b0
    return Detunings(delta_LbJ=delta_Lb - params.coupling_J, delta_Lb=delta_Lb)


def coupling_from_distance(r, J0, r0):
    """Inverse-cube coupling law ``J0 * (r0 / r)**3``; vanishes as ``r -> inf``."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(~(r_arr > 0)):
        raise DomainError(f"distance must be > 0, got {r!r}")
    if r0 <= 0:
        raise DomainError(f"reference distance r0 must be > 0, got {r0!r}")
    J = J0 * (r0 / r_arr) ** 3
    return float(J) if J.ndim == 0 else J


def distance_for_coupling(J, J0, r0):
    """Inverse of :func:`coupling_from_distance` for ``J`` of the same sign as ``J0``."""
    if J == 0:
        return float("inf")
    ratio = J0 / J
    if ratio <= 0:
        raise DomainError("J and J0 must share a sign")
    return float(r0 * ratio ** (1.0 / 3.0))


@dataclass(frozen=True)
class GeneString:
    """A classical gene over the two-letter alphabet {A, B}."""

    bases: str

    def __post_init__(self):
        bases = str(self.bases).upper()
        if len(bases) < 1:
            raise DomainError("a gene needs at least one base")
        bad = set(bases) - {"A", "B"}
        if bad:
            raise DomainError(f"gene alphabet is {{A, B}}; found {sorted(bad)}")
        object.__setattr__(self, "bases", bases)

    def __len__(self):
        return len(self.bases)

    def __str__(self):
        return self.bases

    def __iter__(self):
        return iter(self.bases)

    def as_mask(self):
        """Boolean array, True where the base is ``A``."""
        return np.frombuffer(self.bases.encode("ascii"), dtype=np.uint8) == ord("A")


@dataclass(frozen=True)
class DistanceProfile:
    distances: tuple
    J0: float = 10.0
    r0: float = 1.0
    _couplings: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        d = tuple(float(x) for x in np.atleast_1d(self.distances))
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "_couplings", np.atleast_1d(coupling_from_distance(np.array(d), self.J0, self.r0)))

    def __len__(self):
        return len(self.distances)

    @classmethod
    def uniform(cls, n, r, J0=10.0, r0=1.0):
        return cls(distances=(r,) * n, J0=J0, r0=r0)

    def couplings(self):
        return self._couplings.copy()
