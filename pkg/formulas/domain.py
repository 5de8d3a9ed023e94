import math
from dataclasses import dataclass, field

from ensembles.domain import Protocol, RegimeReport

# Matched/stored phase errors use exp(+xi/(2(1+xi dg^2))); the typeset expression carries exp(-...)
EXPONENT_SIGN_ERRATUM = 'exponent-sign-erratum'


@dataclass(frozen=True)
class PhaseErrorResult:
    """
    Phase error delta_phi with its noise decomposition.

    The three components are variances in units of the F_z variance:
    atomic shot noise, quantum noise of the probe(s), and classical noise
    from the distribution of coupling weights.
    """
    delta_phi: float
    shot_noise: float
    entanglement_noise: float
    inhomogeneity_noise: float
    n_atoms: int
    regime: RegimeReport = field(default_factory=RegimeReport)
    protocol: Protocol | None = None
    xi: float | None = None
    dg2: float | None = None
    notes: tuple = ()

    @property
    def eta(self):
        """Operational squeezing parameter sqrt(N) * delta_phi."""
        return math.sqrt(self.n_atoms) * self.delta_phi

    @property
    def noise_components(self):
        return self.shot_noise, self.entanglement_noise, self.inhomogeneity_noise

    def to_dict(self):
        return {
            'protocol': self.protocol.value if self.protocol else None,
            'xi': self.xi,
            'dg2': self.dg2,
            'n_atoms': self.n_atoms,
            'delta_phi': self.delta_phi,
            'eta': self.eta,
            'shot_noise': self.shot_noise,
            'entanglement_noise': self.entanglement_noise,
            'inhomogeneity_noise': self.inhomogeneity_noise,
            'regime': self.regime.to_dict(),
            'notes': list(self.notes),
        }
