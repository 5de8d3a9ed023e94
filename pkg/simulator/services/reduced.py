"""
Atomic reduced state and collective-spin squeezing parameters.
"""
import logging
import math

import numpy as np
from django.conf import settings
from scipy.linalg import null_space

from ensembles.exceptions import CapacityError, MeanSpinDegenerateError

from ..domain import AtomicReducedState, SqueezingParams, StageSqueezing
from .observables import AXES, AtomicComponent, apply_atomic
from .state_vector import stage_states

logger = logging.getLogger(__name__)

MEAN_SPIN_FLOOR = 1e-9


def atomic_reduced(state, cap=None):
    """Trace every probe pulse out of ``state``; returns the 2^N x 2^N density matrix."""
    cap = settings.QND_METROLOGY['AMPLITUDE_CAP'] if cap is None else int(cap)
    n_atoms = state.dims.n_atoms
    dim = 2 ** n_atoms
    if dim * dim > cap:
        raise CapacityError(
            f"Reduced density matrix {dim} x {dim} exceeds cap {cap}",
            dimension=f'{dim} x {dim}', required=dim * dim, cap=cap,
        )
    flat = state.amplitudes.reshape(dim, -1)
    return AtomicReducedState(flat @ flat.conj().T, n_atoms)


def collective_moments(rho):
    """Mean collective spin vector and its symmetrised 3x3 covariance under ``rho``."""
    weights = (1.0,) * rho.n_atoms
    applied = {
        axis: apply_atomic(AtomicComponent(axis, weights), rho.density, rho.n_atoms)
        for axis in AXES
    }
    mean = np.array([np.real(np.trace(applied[axis])) for axis in AXES])
    second = np.empty((3, 3))
    for i, a in enumerate(AXES):
        for j, b in enumerate(AXES):
            product = apply_atomic(AtomicComponent(a, weights), applied[b], rho.n_atoms)
            second[i, j] = np.real(np.trace(product))
    second = 0.5 * (second + second.T)
    return mean, second - np.outer(mean, mean)


def squeezing_params(rho, strict=False):
    """
    Kitagawa-Ueda and Wineland parameters of ``rho``.

    The minimum variance is taken over directions perpendicular to the mean spin,
    as the smaller eigenvalue of the 2x2 transverse covariance block. With a
    vanishing mean spin there is no transverse plane: the smallest eigenvalue of
    the full covariance is used and xi_w2 is infinite (or MeanSpinDegenerateError
    is raised when ``strict``).
    """
    n_atoms = rho.n_atoms
    mean, cov = collective_moments(rho)
    length = float(np.linalg.norm(mean))

    if length < MEAN_SPIN_FLOOR:
        if strict:
            raise MeanSpinDegenerateError(f"Mean spin length {length:.3e} is below {MEAN_SPIN_FLOOR}")
        min_variance = float(np.linalg.eigvalsh(cov)[0])
        return SqueezingParams(4.0 * min_variance / n_atoms, math.inf, min_variance, length, True)

    plane = null_space((mean / length)[np.newaxis, :])
    min_variance = float(np.linalg.eigvalsh(plane.T @ cov @ plane)[0])
    return SqueezingParams(
        xi_ku2=4.0 * min_variance / n_atoms,
        xi_w2=n_atoms * min_variance / length ** 2,
        min_variance=min_variance,
        mean_spin_length=length,
    )


def stage_squeezing(cfg, params, cap=None):
    """Squeezing parameters and purity of the atoms after every unitary of the protocol."""
    results = []
    for stage, state in stage_states(cfg, params, cap):
        rho = atomic_reduced(state, cap)
        squeezing = squeezing_params(rho)
        if squeezing.mean_spin_degenerate:
            logger.warning("Mean spin vanishes after %s; Wineland parameter diverges", stage)
        results.append(StageSqueezing(stage, squeezing, rho.purity))
        logger.debug("%s: xi_ku2 %.6e xi_w2 %.6e purity %.6e", stage, *squeezing, rho.purity)
    return results
