"""
Observable descriptors and their action on Dicke-ladder amplitudes.

An observable is a real linear combination of components:
- AtomicComponent: sum_k w_k f^k_axis over the atoms
- PhotonComponent: collective S_axis of one probe pulse (pulse 0 is S, pulse 1 is J)
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ensembles.domain import Protocol
from ensembles.exceptions import DescriptorError
from ensembles.services.dicke import apply_bands, collective_bands
from oracle.domain import base_labels, signal_combination

AXES = ('x', 'y', 'z')


def _check_axis(axis):
    if axis not in AXES:
        raise DescriptorError(f"Unknown spin axis {axis!r}")


@dataclass(frozen=True)
class AtomicComponent:
    axis: str
    weights: tuple

    def __post_init__(self):
        _check_axis(self.axis)
        object.__setattr__(self, 'weights', tuple(float(w) for w in self.weights))


@dataclass(frozen=True)
class PhotonComponent:
    pulse: int
    axis: str

    def __post_init__(self):
        _check_axis(self.axis)


@dataclass(frozen=True)
class Observable:
    label: str
    terms: tuple = field(default=())

    @classmethod
    def linear(cls, label, weights):
        """weights: [(coeff, Observable), ...] -> one Observable with merged terms."""
        terms = []
        for coeff, observable in weights:
            terms.extend((coeff * c, component) for c, component in observable.terms)
        return cls(label, tuple(terms))


def atomic_spin(axis, weights, label=None):
    return Observable(label or f'F_{axis}', ((1.0, AtomicComponent(axis, weights)),))


def probe_spin(pulse, axis, label=None):
    name = 'S' if pulse == 0 else 'J'
    return Observable(label or f'{name}_{axis}', ((1.0, PhotonComponent(pulse, axis)),))


def base_observables(cfg, protocol):
    """F_z, Ft_z, S_y (and J_y for two pulses) in MomentSet label order."""
    available = {
        'F_z': atomic_spin('z', np.ones(cfg.n_atoms), 'F_z'),
        'Ft_z': atomic_spin('z', cfg.weights, 'Ft_z'),
        'S_y': probe_spin(0, 'y'),
        'J_y': probe_spin(1, 'y'),
    }
    return [available[label] for label in base_labels(protocol)]


def readout_signal(cfg, protocol, chi):
    """The protocol's measured signal (F'_z, A or B) as an Observable."""
    protocol = Protocol(protocol)
    by_label = {obs.label: obs for obs in base_observables(cfg, protocol)}
    combination = signal_combination(protocol, cfg.n_photons, chi)
    return Observable.linear(
        protocol.signal_label,
        [(coeff, by_label[label]) for label, coeff in combination.items()],
    )


@lru_cache(maxsize=64)
def _bit_table(n_atoms):
    index = np.arange(2 ** n_atoms)
    shifts = n_atoms - 1 - np.arange(n_atoms)
    return (index[:, np.newaxis] >> shifts[np.newaxis, :]) & 1


def atomic_z_diagonal(weights):
    """Eigenvalues of sum_k w_k sigma_k / 2 over the 2^N product basis."""
    weights = np.asarray(weights, dtype=float)
    sigma = 1.0 - 2.0 * _bit_table(len(weights))
    return 0.5 * sigma @ weights


def apply_atomic(component, amplitudes, n_atoms):
    """Apply sum_k w_k f^k_axis along axis 0 of ``amplitudes`` (any trailing shape)."""
    weights = np.asarray(component.weights)
    if weights.size != n_atoms:
        raise DescriptorError(f"Atomic component has {weights.size} weights for {n_atoms} atoms")

    if component.axis == 'z':
        diagonal = atomic_z_diagonal(weights)
        return diagonal.reshape((-1,) + (1,) * (amplitudes.ndim - 1)) * amplitudes

    rest = amplitudes.shape[1:]
    split = amplitudes.reshape((2,) * n_atoms + rest)
    result = np.zeros(split.shape, dtype=complex)
    phases = np.array([-1j, 1j]) if component.axis == 'y' else np.array([1.0, 1.0])
    for k, w in enumerate(weights):
        if w == 0.0:
            continue
        shape = [1] * split.ndim
        shape[k] = 2
        result += 0.5 * w * phases.reshape(shape) * np.flip(split, axis=k)
    return result.reshape(amplitudes.shape)


def apply_photon(component, amplitudes, dims):
    if component.pulse >= dims.pulses or component.pulse < 0:
        raise DescriptorError(
            f"Observable references probe pulse {component.pulse}, state has {dims.pulses} pulse(s)"
        )
    return apply_bands(collective_bands(dims.n_photons, component.axis), amplitudes, 1 + component.pulse)


def apply_observable(observable, state):
    """O|psi> as an amplitude array."""
    result = np.zeros(state.amplitudes.shape, dtype=complex)
    for coeff, component in observable.terms:
        if isinstance(component, AtomicComponent):
            result += coeff * apply_atomic(component, state.amplitudes, state.dims.n_atoms)
        elif isinstance(component, PhotonComponent):
            result += coeff * apply_photon(component, state.amplitudes, state.dims)
        else:
            raise DescriptorError(f"Unknown observable component {component!r}")
    return result
