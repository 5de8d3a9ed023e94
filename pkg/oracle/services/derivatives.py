"""
Central finite-difference slopes with one level of Richardson extrapolation.
"""
import logging

from django.conf import settings

from ensembles.exceptions import ParameterError

logger = logging.getLogger(__name__)

# Relative gap between the extrapolated slope and the h/2 estimate that gets reported
RICHARDSON_WARN_GAP = 1e-6


def default_step():
    return settings.QND_METROLOGY['FINITE_DIFFERENCE_STEP']


def central_difference(fn, h):
    return (fn(h) - fn(-h)) / (2.0 * h)


def central_slope(fn, h=None):
    """
    Derivative of ``fn`` at 0.

    Returns (4 D(h/2) - D(h)) / 3 where D is the central difference, and the
    absolute gap between that value and D(h/2) as an error estimate.
    """
    h = default_step() if h is None else float(h)
    if not h > 0:
        raise ParameterError(f"Finite-difference step must be positive, got {h}")

    coarse = central_difference(fn, h)
    fine = central_difference(fn, h / 2.0)
    slope = (4.0 * fine - coarse) / 3.0
    gap = abs(slope - fine)

    if gap > RICHARDSON_WARN_GAP * max(abs(slope), 1e-300):
        logger.warning("Richardson slope %.6e differs from the h/2 estimate by %.3e", slope, gap)
    return slope, gap
