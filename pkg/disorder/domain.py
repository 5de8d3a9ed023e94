from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class DisorderStats:
    """
    Monte Carlo statistics of one quantity over coupling-weight draws.

    For phase-error quantities ``mean`` is formed from the averaged moments
    (sqrt(mean_variance) / |mean_slope|) while ``per_sample`` and
    ``std_error`` use the per-sample phase errors.
    """
    quantity: str
    mean: float
    std_error: float
    n_samples: int
    seed: int
    per_sample: np.ndarray | None = field(default=None, repr=False)
    mean_variance: float | None = None
    mean_slope: float | None = None

    def to_dict(self):
        return {
            'quantity': self.quantity,
            'mean': self.mean,
            'std_error': self.std_error,
            'n_samples': self.n_samples,
            'seed': self.seed,
            'mean_variance': self.mean_variance,
            'mean_slope': self.mean_slope,
        }


@dataclass(frozen=True)
class SweepRow:
    """One grid point of a sweep; ``stats`` is None when the point hit a capacity limit."""
    index: int
    point: dict
    seed: int
    stats: DisorderStats | None = None
    error: str = ''
