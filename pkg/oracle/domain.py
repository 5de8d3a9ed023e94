"""
MomentSet: first and second moments of the measured observables at one phi.

Base labels are the physical observables at the end of the sequence:
F_z, Ft_z (the coupling-weighted partner), S_y (first probe) and J_y (second
probe, matched protocol only). Readout signals are linear in these and are
added as composite labels: Fp_z (unmatched), A = J_y - S_y (matched),
B = S_y (stored).
"""
from dataclasses import dataclass, field

import numpy as np

from ensembles.domain import Protocol
from ensembles.exceptions import DegenerateProtocolError, DescriptorError

PSD_TOLERANCE = 1e-12


def base_labels(protocol):
    protocol = Protocol(protocol)
    if protocol is Protocol.MATCHED:
        return ('F_z', 'Ft_z', 'S_y', 'J_y')
    return ('F_z', 'Ft_z', 'S_y')


def signal_combination(protocol, n_photons, chi):
    """
    Readout signal of ``protocol`` as {base label: coefficient}.

    F'_z = F_z - 2 S_y / (n chi) is undefined at chi = 0.
    """
    protocol = Protocol(protocol)
    if protocol is Protocol.UNMATCHED:
        if chi == 0:
            raise DegenerateProtocolError("F'_z = F_z - 2 S_y/(n chi) is undefined at chi = 0")
        return {'F_z': 1.0, 'S_y': -2.0 / (n_photons * chi)}
    if protocol is Protocol.MATCHED:
        return {'J_y': 1.0, 'S_y': -1.0}
    return {'S_y': 1.0}


def composite_combinations(protocol, n_photons, chi):
    protocol = Protocol(protocol)
    try:
        return {protocol.signal_label: signal_combination(protocol, n_photons, chi)}
    except DegenerateProtocolError:
        return {}


@dataclass(frozen=True)
class MomentSet:
    """Means and symmetrised covariance matrix over ``labels``."""
    labels: tuple
    means: np.ndarray = field(repr=False)
    covariance: np.ndarray = field(repr=False)
    at_phi: float = 0.0
    protocol: Protocol | None = None

    @classmethod
    def from_raw(cls, labels, means, second_moments, at_phi=0.0, protocol=None, composites=None):
        """
        Build from means and raw symmetrised second moments <(XY + YX)/2>.

        ``composites`` maps extra labels to {base label: coefficient}.
        """
        means = np.asarray(means, dtype=float)
        covariance = np.asarray(second_moments, dtype=float) - np.outer(means, means)
        covariance = 0.5 * (covariance + covariance.T)
        moments = cls(tuple(labels), means, covariance, float(at_phi), protocol)
        return moments.with_composites(composites or {})

    def with_composites(self, composites):
        if not composites:
            return self
        index = {label: i for i, label in enumerate(self.labels)}
        rows = [np.eye(len(self.labels))]
        for weights in composites.values():
            row = np.zeros(len(self.labels))
            for label, coeff in weights.items():
                row[index[label]] += coeff
            rows.append(row[np.newaxis, :])
        transform = np.vstack(rows)
        return MomentSet(
            labels=self.labels + tuple(composites),
            means=transform @ self.means,
            covariance=transform @ self.covariance @ transform.T,
            at_phi=self.at_phi,
            protocol=self.protocol,
        )

    def _index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise DescriptorError(f"No moment labelled {label!r}; available: {', '.join(self.labels)}") from None

    def mean(self, label):
        return float(self.means[self._index(label)])

    def variance(self, label):
        i = self._index(label)
        return float(self.covariance[i, i])

    def cov(self, label_a, label_b):
        return float(self.covariance[self._index(label_a), self._index(label_b)])

    def is_psd(self, tolerance=PSD_TOLERANCE):
        eigenvalues = np.linalg.eigvalsh(self.covariance)
        scale = max(1.0, float(np.max(np.abs(np.diag(self.covariance)))))
        return bool(np.all(eigenvalues >= -tolerance * scale))

    def to_dict(self):
        return {
            'at_phi': self.at_phi,
            'protocol': self.protocol.value if self.protocol else None,
            'means': {label: float(value) for label, value in zip(self.labels, self.means)},
            'covariance': {
                a: {b: float(self.covariance[i, j]) for j, b in enumerate(self.labels)}
                for i, a in enumerate(self.labels)
            },
        }
