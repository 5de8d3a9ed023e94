"""
Coupling-weight generation.

Weights are dimensionless and normalised to unit population mean; the
gaussian kind has population variance ``dist.variance``. Every draw is a pure
function of (kind, variance, seed, N).
"""
import math

import numpy as np

from ..domain import CouplingKind
from ..exceptions import ParameterError

# (pi/2)|cos(theta)| has mean 1 under uniform theta
AMPLITUDE_NORMALISATION = math.pi / 2.0


def rng_for(seed, *stream):
    """
    numpy Generator for ``seed``; extra integers select an independent child
    stream (per-sample draws in Monte Carlo loops).
    """
    if stream:
        return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream)))
    return np.random.default_rng(int(seed))


def make_weights(dist, n_atoms, stream=()):
    """
    Draw N coupling weights.

    Args:
        dist: CouplingDistribution
        n_atoms: number of atoms N >= 1
        stream: spawn key selecting an independent child stream of dist.seed

    Returns:
        np.ndarray of length N
    """
    n_atoms = int(n_atoms)
    if n_atoms < 1:
        raise ParameterError(f"n_atoms must be >= 1, got {n_atoms}")
    if dist.variance < 0:
        raise ParameterError(f"Coupling variance must be non-negative, got {dist.variance}")

    if dist.kind is CouplingKind.UNIFORM_UNIT:
        return np.ones(n_atoms)

    rng = rng_for(dist.seed, *stream)
    if dist.kind is CouplingKind.GAUSSIAN:
        # Negative draws are kept: every formula is polynomial or trigonometric in g_k
        return rng.normal(loc=1.0, scale=math.sqrt(dist.variance), size=n_atoms)

    theta = rng.uniform(0.0, 2.0 * math.pi, size=n_atoms)
    if dist.kind is CouplingKind.STANDING_WAVE:
        return 2.0 * np.cos(theta) ** 2
    if dist.kind is CouplingKind.STANDING_WAVE_AMPLITUDE:
        return AMPLITUDE_NORMALISATION * np.abs(np.cos(theta))

    raise ParameterError(f"Unknown coupling kind {dist.kind!r}")


def empirical_disorder(weights):
    """
    Sample mean and population variance (divisor N) of a weight vector.

    Returns:
        (mean, variance) as floats
    """
    weights = np.asarray(weights, dtype=float).reshape(-1)
    if weights.size == 0:
        raise ParameterError("Cannot compute the disorder of an empty weight vector")
    mean = float(np.mean(weights))
    if np.all(weights == weights[0]):
        return mean, 0.0
    return mean, float(np.var(weights))


def population_moments(kind, variance=0.0):
    """Analytic (mean, variance) of each coupling kind."""
    kind = CouplingKind(kind)
    if kind is CouplingKind.UNIFORM_UNIT:
        return 1.0, 0.0
    if kind is CouplingKind.GAUSSIAN:
        return 1.0, float(variance)
    if kind is CouplingKind.STANDING_WAVE:
        return 1.0, 0.5
    return 1.0, math.pi ** 2 / 8.0 - 1.0
