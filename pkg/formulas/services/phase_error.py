"""
Closed-form phase errors of the three readout protocols.

All expressions are already averaged over Gaussian coupling disorder with unit
mean and variance dg2, and are first order in phi. Results are returned in
radians; noise components are variances in units of Var(F_z).
"""
import logging
import math

from ensembles.domain import Protocol
from ensembles.exceptions import DivergenceError, ParameterError
from ensembles.services.regime import formula_regime

from ..domain import EXPONENT_SIGN_ERRATUM, PhaseErrorResult

logger = logging.getLogger(__name__)


def _validate(xi, dg2, n_atoms, allow_zero_xi=False):
    if not math.isfinite(xi) or xi < 0:
        raise ParameterError(f"xi must be finite and non-negative, got {xi}")
    if not math.isfinite(dg2) or dg2 < 0:
        raise ParameterError(f"dg2 must be finite and non-negative, got {dg2}")
    if int(n_atoms) < 1:
        raise ParameterError(f"n_atoms must be >= 1, got {n_atoms}")
    if xi == 0 and not allow_zero_xi:
        raise DivergenceError("xi = 0: no QND information is acquired, the phase error diverges")


def _exp(exponent):
    try:
        return math.exp(exponent)
    except OverflowError:
        return math.inf


def is_extrapolated(xi, dg2):
    """True when xi*dg2 >= 1, outside the expansion the closed forms rely on."""
    return xi * dg2 >= 1.0


def _half_exponent(xi, dg2):
    return 0.5 * xi / (1.0 + xi * dg2)


def signal_factor(xi, dg2):
    """
    Disorder average <exp(-xi g^2 / 2)> over Gaussian g with unit mean.

    Equals exp(-xi/(2(1 + xi dg2))) / sqrt(1 + xi dg2).
    """
    return math.exp(-_half_exponent(xi, dg2)) / math.sqrt(1.0 + xi * dg2)


def mean_signal_unmatched(phi, xi, dg2, n_atoms, with_regime=False):
    """
    <F'_z> to first order in phi.

    With ``with_regime`` the result is ``(value, RegimeReport)``; the report's
    ``extrapolated`` flag is set when xi*dg2 >= 1.
    """
    _validate(xi, dg2, n_atoms, allow_zero_xi=True)
    if is_extrapolated(xi, dg2):
        logger.warning("mean_signal_unmatched evaluated outside its regime: xi*dg2 = %g", xi * dg2)
    value = -0.5 * n_atoms * phi * signal_factor(xi, dg2)
    if with_regime:
        return value, formula_regime(xi, dg2, n_atoms)
    return value


def variance_unmatched(xi, dg2, n_atoms):
    """
    Var(F'_z) at phi = 0.

    Returns:
        (total, (shot, entanglement, inhomogeneity))
    """
    _validate(xi, dg2, n_atoms)
    total = (1.0 + n_atoms * xi * dg2) / (4.0 * xi)
    components = (n_atoms / 4.0, 1.0 / (4.0 * xi), n_atoms * dg2 / 4.0)
    return total, components


def _result(protocol, delta_phi, components, xi, dg2, n_atoms, n_photons, notes=()):
    regime = formula_regime(xi, dg2, n_atoms, n_photons=n_photons)
    if is_extrapolated(xi, dg2):
        logger.warning("%s phase error extrapolated: xi*dg2 = %g", protocol.value, xi * dg2)
    shot, entanglement, inhomogeneity = components
    return PhaseErrorResult(
        delta_phi=delta_phi,
        shot_noise=shot,
        entanglement_noise=entanglement,
        inhomogeneity_noise=inhomogeneity,
        n_atoms=int(n_atoms),
        regime=regime,
        protocol=protocol,
        xi=xi,
        dg2=dg2,
        notes=tuple(notes),
    )


def _unmatched_value(xi, dg2, n_atoms):
    return (
        math.sqrt((1.0 + n_atoms * xi * dg2) * (1.0 + xi * dg2))
        * _exp(_half_exponent(xi, dg2))
        / (n_atoms * math.sqrt(xi))
    )


def delta_phi_unmatched(xi, dg2, n_atoms, n_photons=None):
    _validate(xi, dg2, n_atoms)
    _, components = variance_unmatched(xi, dg2, n_atoms)
    return _result(
        Protocol.UNMATCHED, _unmatched_value(xi, dg2, n_atoms), components, xi, dg2, n_atoms, n_photons,
    )


def _matched_value(xi, dg2, n_atoms):
    return (
        math.sqrt(2.0 / xi)
        * (1.0 + xi * dg2) ** 1.5
        * _exp(_half_exponent(xi, dg2))
        / n_atoms
    )


def _stored_value(xi, dg2, n_atoms):
    return _matched_value(xi, dg2, n_atoms) / math.sqrt(2.0)


def delta_phi_matched(xi, dg2, n_atoms, n_photons=None):
    """Two matched probes, signal A = J_y - S_y. Inhomogeneity noise cancels."""
    _validate(xi, dg2, n_atoms)
    return _result(
        Protocol.MATCHED,
        _matched_value(xi, dg2, n_atoms),
        (0.0, 1.0 / (2.0 * xi), 0.0),
        xi, dg2, n_atoms, n_photons,
        notes=(EXPONENT_SIGN_ERRATUM,),
    )


def delta_phi_stored(xi, dg2, n_atoms, n_photons=None):
    """One probe stored and sent back with reversed coupling; half the probe noise of matched."""
    _validate(xi, dg2, n_atoms)
    return _result(
        Protocol.STORED,
        _stored_value(xi, dg2, n_atoms),
        (0.0, 1.0 / (4.0 * xi), 0.0),
        xi, dg2, n_atoms, n_photons,
        notes=(EXPONENT_SIGN_ERRATUM,),
    )


PHASE_ERRORS = {
    Protocol.UNMATCHED: delta_phi_unmatched,
    Protocol.MATCHED: delta_phi_matched,
    Protocol.STORED: delta_phi_stored,
}


def delta_phi(protocol, xi, dg2, n_atoms, n_photons=None):
    """Phase error of ``protocol`` at (xi, dg2, N)."""
    return PHASE_ERRORS[Protocol(protocol)](xi, dg2, n_atoms, n_photons=n_photons)


_VALUES = {
    Protocol.UNMATCHED: _unmatched_value,
    Protocol.MATCHED: _matched_value,
    Protocol.STORED: _stored_value,
}


def phase_error_value(protocol, xi, dg2, n_atoms):
    """
    Bare delta_phi in radians, without the noise decomposition or regime report.
    Nothing is logged.
    """
    _validate(xi, dg2, n_atoms)
    return _VALUES[Protocol(protocol)](xi, dg2, n_atoms)


def signal_moments(protocol, xi, dg2, n_atoms, n_photons):
    """
    (variance at phi = 0, slope d<signal>/dphi at phi = 0) in readout units.

    Unmatched reads F'_z; matched reads A = J_y - S_y; stored reads B = S_y.
    The ratio sqrt(variance)/|slope| reproduces ``delta_phi``.
    """
    protocol = Protocol(protocol)
    _validate(xi, dg2, n_atoms)
    if int(n_photons) < 1:
        raise ParameterError(f"n_photons must be >= 1, got {n_photons}")

    if protocol is Protocol.UNMATCHED:
        variance, _ = variance_unmatched(xi, dg2, n_atoms)
        return variance, -0.5 * n_atoms * signal_factor(xi, dg2)

    chi = 2.0 * math.sqrt(xi / n_photons)
    magnitude = 0.25 * chi * n_photons * n_atoms * math.exp(-_half_exponent(xi, dg2)) / (1.0 + xi * dg2) ** 1.5
    if protocol is Protocol.MATCHED:
        return n_photons / 2.0, -magnitude
    return n_photons / 4.0, magnitude
