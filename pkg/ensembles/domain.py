"""
Domain types shared by every module: the atomic ensemble, the coupling-weight
distribution, the protocol parameters and the regime report.

All types are frozen; weight arrays are stored read-only so a config can be
handed to concurrent workers.
"""
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ParameterError


class CouplingKind(str, enum.Enum):
    UNIFORM_UNIT = 'uniform-unit'
    GAUSSIAN = 'gaussian'
    STANDING_WAVE = 'standing-wave'
    STANDING_WAVE_AMPLITUDE = 'standing-wave-amplitude'


class Protocol(str, enum.Enum):
    """Readout scheme: single probe, two matched probes, or one stored probe."""
    UNMATCHED = 'unmatched'
    MATCHED = 'matched'
    STORED = 'stored'

    @property
    def pulses(self):
        return 2 if self is Protocol.MATCHED else 1

    @property
    def signal_label(self):
        return {
            Protocol.UNMATCHED: 'Fp_z',
            Protocol.MATCHED: 'A',
            Protocol.STORED: 'B',
        }[self]


UINT64_MAX = 2 ** 64 - 1


@dataclass(frozen=True)
class CouplingDistribution:
    kind: CouplingKind = CouplingKind.UNIFORM_UNIT
    variance: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'kind', CouplingKind(self.kind))
        if not math.isfinite(self.variance) or self.variance < 0:
            raise ParameterError(f"Coupling variance must be finite and non-negative, got {self.variance}")
        if not 0 <= int(self.seed) <= UINT64_MAX:
            raise ParameterError(f"Seed must be an unsigned 64-bit integer, got {self.seed}")
        object.__setattr__(self, 'seed', int(self.seed))

    def with_seed(self, seed):
        return CouplingDistribution(kind=self.kind, variance=self.variance, seed=seed)

    def to_dict(self):
        return {'kind': self.kind.value, 'variance': self.variance, 'seed': self.seed}


@dataclass(frozen=True)
class EnsembleConfig:
    """N atoms with coupling weights g_k, probed by pulses of n photons."""
    n_atoms: int
    n_photons: int
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        if int(self.n_atoms) < 1:
            raise ParameterError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if int(self.n_photons) < 1:
            raise ParameterError(f"n_photons must be >= 1, got {self.n_photons}")
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if weights.size != int(self.n_atoms):
            raise ParameterError(
                f"weights has length {weights.size}, expected n_atoms={self.n_atoms}"
            )
        if not np.all(np.isfinite(weights)):
            raise ParameterError("weights must all be finite")
        weights.setflags(write=False)
        object.__setattr__(self, 'n_atoms', int(self.n_atoms))
        object.__setattr__(self, 'n_photons', int(self.n_photons))
        object.__setattr__(self, 'weights', weights)

    @classmethod
    def uniform(cls, n_atoms, n_photons):
        return cls(n_atoms=n_atoms, n_photons=n_photons, weights=np.ones(int(n_atoms)))

    @classmethod
    def build(cls, n_atoms, n_photons, dist):
        """Draw the weight vector from ``dist``."""
        from .services.weights import make_weights
        return cls(n_atoms=n_atoms, n_photons=n_photons, weights=make_weights(dist, n_atoms))

    def with_weights(self, weights):
        return EnsembleConfig(n_atoms=self.n_atoms, n_photons=self.n_photons, weights=weights)

    @property
    def mean_weight(self):
        from .services.weights import empirical_disorder
        return empirical_disorder(self.weights)[0]

    @property
    def weight_variance(self):
        """Population variance (dg)^2 of the drawn weights."""
        from .services.weights import empirical_disorder
        return empirical_disorder(self.weights)[1]


@dataclass(frozen=True)
class ProtocolParams:
    """
    Interaction angle chi (= Omega*tau), rotation angle phi and readout scheme.

    xi = n*chi^2/4 is never stored; it is recomputed from the photon number.
    """
    chi: float
    phi: float = 0.0
    protocol: Protocol = Protocol.MATCHED

    def __post_init__(self):
        object.__setattr__(self, 'protocol', Protocol(self.protocol))
        if not math.isfinite(self.chi) or not math.isfinite(self.phi):
            raise ParameterError("chi and phi must be finite")
        object.__setattr__(self, 'chi', float(self.chi))
        object.__setattr__(self, 'phi', float(self.phi))

    @classmethod
    def from_xi(cls, xi, n_photons, protocol=Protocol.MATCHED, phi=0.0):
        if xi < 0:
            raise ParameterError(f"xi must be non-negative, got {xi}")
        return cls(chi=2.0 * math.sqrt(xi / n_photons), phi=phi, protocol=protocol)

    def xi(self, n_photons):
        return n_photons * self.chi * self.chi / 4.0

    def at_phi(self, phi):
        return ProtocolParams(chi=self.chi, phi=phi, protocol=self.protocol)

    def with_protocol(self, protocol):
        return ProtocolParams(chi=self.chi, phi=self.phi, protocol=protocol)


@dataclass(frozen=True)
class RegimeReport:
    """
    Validity margins of the small-parameter expansions, reported as raw ratios.

    A margin of ``None`` means it cannot be computed from the inputs at hand
    (the formula layer does not know the photon number).
    """
    small_kick: float | None = None
    small_bend: float | None = None
    photon_dominance: float | None = None
    small_disorder_xi: float | None = None
    inhomogeneity_criterion: float | None = None
    threshold: float = 0.1
    notes: tuple = ()

    MARGINS = (
        'small_kick',
        'small_bend',
        'photon_dominance',
        'small_disorder_xi',
        'inhomogeneity_criterion',
    )

    def satisfied(self, margin):
        value = getattr(self, margin)
        if value is None:
            return None
        return value < self.threshold

    @property
    def flags(self):
        return {name: self.satisfied(name) for name in self.MARGINS}

    @property
    def extrapolated(self):
        """xi*(dg)^2 >= 1: outside the expansion the closed forms rely on."""
        return self.small_disorder_xi is not None and self.small_disorder_xi >= 1.0

    @property
    def all_satisfied(self):
        return all(flag is not False for flag in self.flags.values())

    def to_dict(self):
        data = {name: getattr(self, name) for name in self.MARGINS}
        data.update({f'{name}_ok': flag for name, flag in self.flags.items()})
        data['extrapolated'] = self.extrapolated
        data['notes'] = list(self.notes)
        return data
