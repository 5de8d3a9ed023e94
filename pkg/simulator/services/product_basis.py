"""
Reference simulator in the full qubit product basis.

Every atom and every photon spin is its own qubit, so nothing relies on the
Dicke-ladder reduction. Only meant for tiny sizes; used to cross-check the
ladder simulator and the moment oracle.
"""
import numpy as np
from django.conf import settings

from ensembles.domain import Protocol
from ensembles.exceptions import CapacityError
from oracle.domain import MomentSet, base_labels, composite_combinations

from .state_vector import rotation_matrix

PAULI = {
    'x': np.array([[0, 1], [1, 0]], dtype=complex),
    'y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'z': np.array([[1, 0], [0, -1]], dtype=complex),
}


class ProductBasisState:
    """Qubits ordered atoms first, then the photons of pulse 0, then pulse 1."""

    def __init__(self, cfg, pulses, max_qubits=None):
        max_qubits = settings.QND_METROLOGY['PRODUCT_BASIS_MAX_QUBITS'] if max_qubits is None else max_qubits
        self.cfg = cfg
        self.pulses = pulses
        self.n_qubits = cfg.n_atoms + pulses * cfg.n_photons
        if self.n_qubits > max_qubits:
            raise CapacityError(
                f"Product basis needs {self.n_qubits} qubits, cap is {max_qubits}",
                dimension='qubits', required=self.n_qubits, cap=max_qubits,
            )
        self.amplitudes = np.full((2,) * self.n_qubits, 2.0 ** (-self.n_qubits / 2.0), dtype=complex)

    def atom_qubits(self):
        return list(range(self.cfg.n_atoms))

    def pulse_qubits(self, pulse):
        start = self.cfg.n_atoms + pulse * self.cfg.n_photons
        return list(range(start, start + self.cfg.n_photons))

    def z_values(self, qubits, weights=None):
        """Diagonal of sum_j w_j sigma^j_z / 2 over the given qubits, as a full-shape array."""
        weights = np.ones(len(qubits)) if weights is None else np.asarray(weights, dtype=float)
        total = np.zeros((2,) * self.n_qubits)
        for qubit, w in zip(qubits, weights):
            shape = [1] * self.n_qubits
            shape[qubit] = 2
            total = total + 0.5 * w * np.array([1.0, -1.0]).reshape(shape)
        return total

    def apply_single(self, matrix, qubit, amplitudes=None):
        amplitudes = self.amplitudes if amplitudes is None else amplitudes
        return np.moveaxis(np.tensordot(matrix, amplitudes, axes=([1], [qubit])), 0, qubit)

    def apply_collective(self, axis, qubits, weights=None, amplitudes=None):
        amplitudes = self.amplitudes if amplitudes is None else amplitudes
        weights = np.ones(len(qubits)) if weights is None else weights
        result = np.zeros_like(amplitudes)
        for qubit, w in zip(qubits, weights):
            result += 0.5 * w * self.apply_single(PAULI[axis], qubit, amplitudes)
        return result

    def qnd(self, chi, pulse, sign=1):
        ft = self.z_values(self.atom_qubits(), self.cfg.weights)
        sz = self.z_values(self.pulse_qubits(pulse))
        self.amplitudes = self.amplitudes * np.exp(-1j * sign * chi * sz * ft)

    def rotate(self, phi):
        rotation = rotation_matrix(phi).astype(complex)
        for qubit in self.atom_qubits():
            self.amplitudes = self.apply_single(rotation, qubit)

    def observable_vectors(self, protocol):
        vectors = {
            'F_z': self.apply_collective('z', self.atom_qubits()),
            'Ft_z': self.apply_collective('z', self.atom_qubits(), self.cfg.weights),
            'S_y': self.apply_collective('y', self.pulse_qubits(0)),
        }
        if self.pulses == 2:
            vectors['J_y'] = self.apply_collective('y', self.pulse_qubits(1))
        return [vectors[label] for label in base_labels(protocol)]


def product_basis_moments(cfg, params, max_qubits=None):
    """MomentSet from the qubit product-basis simulation of the protocol."""
    protocol = params.protocol
    state = ProductBasisState(cfg, protocol.pulses, max_qubits)
    state.qnd(params.chi, pulse=0)
    state.rotate(params.phi)
    if protocol is Protocol.MATCHED:
        state.qnd(params.chi, pulse=1)
    elif protocol is Protocol.STORED:
        state.qnd(params.chi, pulse=0, sign=-1)

    psi = state.amplitudes.reshape(-1)
    applied = [v.reshape(-1) for v in state.observable_vectors(protocol)]
    means = [np.real(np.vdot(psi, v)) for v in applied]
    second = [[np.real(np.vdot(a, b)) for b in applied] for a in applied]
    return MomentSet.from_raw(
        base_labels(protocol),
        means,
        second,
        at_phi=params.phi,
        protocol=protocol,
        composites=composite_combinations(protocol, cfg.n_photons, params.chi),
    )
