"""
State types of the exact simulator.

Amplitude layout: axis 0 is the atomic z-product index 0..2^N-1 (atom k is
bit N-1-k, bit value 0 = up); axis 1 (and 2) are the Dicke indices q = 0..n
of the first (and second) probe pulse.
"""
import math
from dataclasses import dataclass, field

import numpy as np

NORM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class StateDims:
    n_atoms: int
    n_photons: int
    pulses: int

    @property
    def shape(self):
        return (2 ** self.n_atoms,) + (self.n_photons + 1,) * self.pulses

    @property
    def size(self):
        return math.prod(self.shape)

    def describe(self):
        return ' x '.join(str(d) for d in self.shape)


@dataclass
class QuantumState:
    """Pure state of atoms and probe pulses. Owned by one protocol run."""
    amplitudes: np.ndarray = field(repr=False)
    dims: StateDims

    def __post_init__(self):
        if self.amplitudes.shape != self.dims.shape:
            raise ValueError(f"Amplitude shape {self.amplitudes.shape} does not match {self.dims.shape}")

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def copy(self):
        return QuantumState(self.amplitudes.copy(), self.dims)

    def with_amplitudes(self, amplitudes):
        return QuantumState(amplitudes, self.dims)


@dataclass(frozen=True)
class AtomicReducedState:
    """Density matrix of the atoms with every probe traced out."""
    density: np.ndarray = field(repr=False)
    n_atoms: int

    @property
    def trace(self):
        return float(np.real(np.trace(self.density)))

    @property
    def purity(self):
        return float(np.real(np.vdot(self.density, self.density)))

    @property
    def is_hermitian(self):
        return bool(np.allclose(self.density, self.density.conj().T, atol=NORM_TOLERANCE))


@dataclass(frozen=True)
class SqueezingParams:
    """
    Kitagawa-Ueda and Wineland parameters of the collective atomic spin.

    xi_w2 is infinite (and mean_spin_degenerate set) when the mean spin vanishes.
    """
    xi_ku2: float
    xi_w2: float
    min_variance: float
    mean_spin_length: float
    mean_spin_degenerate: bool = False

    def __iter__(self):
        return iter((self.xi_ku2, self.xi_w2))


@dataclass(frozen=True)
class StageSqueezing:
    stage: str
    squeezing: SqueezingParams
    purity: float
