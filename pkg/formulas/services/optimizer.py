"""
One-dimensional minimization of a protocol's closed-form phase error over xi.

The search runs on ln(xi): a coarse prescan brackets the minimum, then a
bounded Brent search refines it inside the bracketing grid cell.
"""
import logging
import math

import numpy as np
from django.conf import settings
from scipy.optimize import minimize_scalar

from ensembles.domain import Protocol
from ensembles.exceptions import NumericError, ParameterError

from .phase_error import delta_phi, phase_error_value

logger = logging.getLogger(__name__)

PRESCAN_POINTS = 241


def optimal_xi(dg2, n_atoms, protocol, xi_max=None, xi_min=None, tol=None):
    """
    Minimize delta_phi(protocol, xi, dg2, N) over xi in [xi_min, xi_max].

    Returns:
        (xi_star, delta_phi_min)

    Raises:
        NumericError: the refinement did not converge; carries the best iterate.
    """
    knobs = settings.QND_METROLOGY
    xi_max = knobs['XI_MAX'] if xi_max is None else float(xi_max)
    xi_min = knobs['XI_MIN'] if xi_min is None else float(xi_min)
    tol = knobs['OPTIMIZER_TOL'] if tol is None else float(tol)
    protocol = Protocol(protocol)

    if not math.isfinite(dg2) or dg2 < 0:
        raise ParameterError(f"dg2 must be finite and non-negative, got {dg2}")
    if not 0 < xi_min < xi_max:
        raise ParameterError(f"Need 0 < xi_min < xi_max, got [{xi_min}, {xi_max}]")

    def objective(log_xi):
        value = phase_error_value(protocol, math.exp(log_xi), dg2, n_atoms)
        return math.log(value) if value > 0 else -math.inf

    grid = np.linspace(math.log(xi_min), math.log(xi_max), PRESCAN_POINTS)
    values = np.array([objective(x) for x in grid])
    best = int(np.argmin(values))
    if best in (0, PRESCAN_POINTS - 1):
        logger.warning(
            "optimal_xi for %s (dg2=%g, N=%s) sits on the search boundary xi=%g",
            protocol.value, dg2, n_atoms, math.exp(grid[best]),
        )

    lower = grid[max(best - 1, 0)]
    upper = grid[min(best + 1, PRESCAN_POINTS - 1)]
    result = minimize_scalar(
        objective,
        bounds=(lower, upper),
        method='bounded',
        options={'xatol': tol, 'maxiter': 500},
    )

    if not result.success or not math.isfinite(result.fun):
        best_x = math.exp(grid[best])
        raise NumericError(
            f"optimal_xi did not converge for {protocol.value}: {result.message}",
            best_x=best_x,
            best_value=math.exp(values[best]),
        )

    xi_star = math.exp(result.x)
    logger.debug("optimal_xi %s dg2=%g N=%s -> xi*=%.12g", protocol.value, dg2, n_atoms, xi_star)
    return xi_star, delta_phi(protocol, xi_star, dg2, n_atoms).delta_phi
