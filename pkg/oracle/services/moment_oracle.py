"""
Exact first and second moments of the protocol observables for fixed weights.

Atoms start in |+x> and probes in the x-polarised coherent state. Once the
first probe sits in its S_z eigenstate q the atoms are a product state, so
every expectation is a sum over (q', q) of probe matrix elements times a
product of single-atom overlaps. At phi = 0 those overlaps do not depend on q
and the sums collapse to characteristic functions of the probe (cost O(N),
any n). Away from phi = 0 the sum over q is kept (cost O(N n)). The second
probe of the matched protocol is handled in the Heisenberg picture:
J_y(out) = J_y cos(chi Ft_z) + J_x sin(chi Ft_z).
"""
import logging
import math

import numpy as np
from django.conf import settings

from ensembles.domain import Protocol
from ensembles.exceptions import DegenerateProtocolError, ParameterError
from ensembles.services.dicke import collective_bands, compose_bands, css_amplitudes, sz_eigenvalues
from ensembles.services.regime import check_regime
from ensembles.services.weights import empirical_disorder
from formulas.domain import PhaseErrorResult

from ..domain import MomentSet, base_labels, composite_combinations, signal_combination
from .characteristic import css_char, leave_one_out_products, product
from .derivatives import central_slope

logger = logging.getLogger(__name__)

SLOPE_MODES = ('auto', 'richardson', 'analytic')


def exact_moments(cfg, params):
    """
    MomentSet of F_z, Ft_z, S_y (, J_y) and the protocol's readout signal.
    """
    if params.phi == 0.0:
        logger.debug("exact_moments: closed form at phi = 0 (N=%d)", cfg.n_atoms)
        return _closed_form_moments(cfg, params)
    logger.debug("exact_moments: conditioned sum at phi=%g (N=%d, n=%d)", params.phi, cfg.n_atoms, cfg.n_photons)
    return _conditioned_moments(cfg, params)


def _finish(cfg, params, means, second):
    return MomentSet.from_raw(
        base_labels(params.protocol),
        means,
        second,
        at_phi=params.phi,
        protocol=params.protocol,
        composites=composite_combinations(params.protocol, cfg.n_photons, params.chi),
    )


def _closed_form_moments(cfg, params):
    n, chi, g = cfg.n_photons, params.chi, cfg.weights
    protocol = params.protocol
    labels = base_labels(protocol)
    size = len(labels)
    means = np.zeros(size)
    second = np.zeros((size, size))

    second[0, 0] = cfg.n_atoms / 4.0
    second[0, 1] = second[1, 0] = float(np.sum(g)) / 4.0
    second[1, 1] = float(np.sum(g * g)) / 4.0

    if protocol is Protocol.STORED or chi == 0.0:
        # The reversed coupling undoes the first one: the initial product state
        second[2, 2] = n / 4.0
        if protocol is Protocol.MATCHED:
            second[3, 3] = n / 4.0
        return _finish(cfg, params, means, second)

    half = np.cos(0.5 * chi * g)
    sines = np.sin(0.5 * chi * g)
    others = leave_one_out_products(half)
    p2 = product(np.cos(chi * g))
    q1 = 0.5 * float(np.sum(sines * others))
    q1g = 0.5 * float(np.sum(g * sines * others))

    var_sy = (n * n / 4.0) * (1.0 - p2) / 2.0 + (n / 4.0) * (1.0 + p2) / 2.0
    second[2, 2] = var_sy
    second[0, 2] = second[2, 0] = (n / 2.0) * q1
    second[1, 2] = second[2, 1] = (n / 2.0) * q1g

    if protocol is Protocol.MATCHED:
        second[3, 3] = var_sy
        second[2, 3] = second[3, 2] = (n * n / 4.0) * (1.0 - p2) / 2.0
        second[0, 3] = second[3, 0] = (n / 2.0) * q1
        second[1, 3] = second[3, 1] = (n / 2.0) * q1g

    return _finish(cfg, params, means, second)


class ConditionedState:
    """
    Final state sum_q c_q |q> (x) prod_k |a_k(q)> of the first probe and the atoms.

    For the matched protocol this is the state before the second interaction,
    which commutes with every atomic and first-probe observable.
    """

    def __init__(self, cfg, params):
        self.cfg = cfg
        self.params = params
        self.n = cfg.n_photons
        self.amplitudes = css_amplitudes(self.n)
        self.levels = sz_eigenvalues(self.n)
        self._cache = {}

    def atom_state(self, k):
        """(up, down) amplitudes of atom k, one entry per probe level q."""
        chi, phi = self.params.chi, self.params.phi
        theta = 0.5 * chi * self.levels * self.cfg.weights[k]
        up = np.exp(-1j * theta) / math.sqrt(2.0)
        down = np.exp(1j * theta) / math.sqrt(2.0)
        c, s = math.cos(0.5 * phi), math.sin(0.5 * phi)
        up, down = c * up - s * down, s * up + c * down
        if self.params.protocol is Protocol.STORED:
            up, down = up * np.exp(1j * theta), down * np.exp(-1j * theta)
        return up, down

    @staticmethod
    def _pair(values, offset):
        """(values[q + offset], values[q]) over every valid q."""
        size = len(values)
        if offset >= 0:
            return values[offset:], values[:size - offset]
        return values[:size + offset], values[-offset:]

    def overlaps(self, offset, beta, second_order=True):
        """
        Sums over atoms of <A(q+offset)| O exp(i beta Ft_z) |A(q)> for
        O in {1, F_z, Ft_z, F_z^2, F_z Ft_z, Ft_z^2}, as arrays over q.
        """
        key = (offset, beta, second_order)
        if key in self._cache:
            return self._cache[key]

        size = self.n + 1 - abs(offset)
        p0 = np.ones(size, dtype=complex)
        pf = np.zeros(size, dtype=complex)
        pg = np.zeros(size, dtype=complex)
        pff = np.zeros(size, dtype=complex)
        pfg = np.zeros(size, dtype=complex)
        pgg = np.zeros(size, dtype=complex)

        for k, g in enumerate(self.cfg.weights):
            up, down = self.atom_state(k)
            up_l, up_r = self._pair(up, offset)
            down_l, down_r = self._pair(down, offset)
            d_up, d_down = np.exp(0.5j * beta * g), np.exp(-0.5j * beta * g)
            upper = np.conj(up_l) * up_r * d_up
            lower = np.conj(down_l) * down_r * d_down
            e = upper + lower
            z = 0.5 * (upper - lower)

            if second_order:
                pff = pff * e + 2.0 * pf * z + 0.25 * p0 * e
                pfg = pfg * e + g * pf * z + pg * z + 0.25 * g * p0 * e
                pgg = pgg * e + 2.0 * g * pg * z + 0.25 * g * g * p0 * e
            pf = pf * e + p0 * z
            pg = pg * e + g * p0 * z
            p0 = p0 * e

        result = {'1': p0, 'F_z': pf, 'Ft_z': pg, 'F_z F_z': pff, 'F_z Ft_z': pfg, 'Ft_z Ft_z': pgg}
        self._cache[key] = result
        return result

    def expectation(self, probe_bands, atomic, beta=0.0, second_order=False):
        """<probe (x) atomic exp(i beta Ft_z)> with probe given as bands (None = identity)."""
        if probe_bands is None:
            probe_bands = {0: np.ones(self.n + 1, dtype=complex)}
        c = self.amplitudes
        total = 0.0 + 0.0j
        for offset, coeff in probe_bands.items():
            if abs(offset) > self.n:
                continue
            c_l, c_r = self._pair(c, offset)
            _, coeff_r = self._pair(coeff, offset)
            atoms = self.overlaps(offset, beta, second_order)[atomic]
            total += complex(np.sum(c_l * c_r * coeff_r * atoms))
        return total


def _conditioned_moments(cfg, params):
    state = ConditionedState(cfg, params)
    n, chi = cfg.n_photons, params.chi
    sy = collective_bands(n, 'y')
    sy2 = compose_bands(sy, sy)

    def ev(probe, atomic, beta=0.0):
        return state.expectation(probe, atomic, beta, second_order=True)

    labels = base_labels(params.protocol)
    size = len(labels)
    means = np.zeros(size)
    second = np.zeros((size, size))

    means[0] = ev(None, 'F_z').real
    means[1] = ev(None, 'Ft_z').real
    means[2] = ev(sy, '1').real
    second[0, 0] = ev(None, 'F_z F_z').real
    second[0, 1] = second[1, 0] = ev(None, 'F_z Ft_z').real
    second[1, 1] = ev(None, 'Ft_z Ft_z').real
    second[0, 2] = second[2, 0] = ev(sy, 'F_z').real
    second[1, 2] = second[2, 1] = ev(sy, 'Ft_z').real
    second[2, 2] = ev(sy2, '1').real

    if params.protocol is Protocol.MATCHED:
        # <J_x> = n/2, <J_x^2> = n^2/4, <J_y^2> = n/4 on the fresh second probe
        means[3] = 0.5 * n * ev(None, '1', chi).imag
        second[0, 3] = second[3, 0] = 0.5 * n * ev(None, 'F_z', chi).imag
        second[1, 3] = second[3, 1] = 0.5 * n * ev(None, 'Ft_z', chi).imag
        second[2, 3] = second[3, 2] = 0.5 * n * ev(sy, '1', chi).imag
        cos_double = ev(None, '1', 2.0 * chi).real
        second[3, 3] = (n / 4.0) * (1.0 + cos_double) / 2.0 + (n * n / 4.0) * (1.0 - cos_double) / 2.0

    return _finish(cfg, params, means, second)


def signal_mean(cfg, params):
    """<signal>(phi) of the protocol; first moments only."""
    combination = signal_combination(params.protocol, cfg.n_photons, params.chi)
    if params.phi == 0.0:
        return 0.0

    state = ConditionedState(cfg, params)
    n, chi = cfg.n_photons, params.chi
    means = {}
    if 'F_z' in combination:
        means['F_z'] = state.expectation(None, 'F_z').real
    if 'S_y' in combination:
        means['S_y'] = state.expectation(collective_bands(n, 'y'), '1').real
    if 'J_y' in combination:
        means['J_y'] = 0.5 * n * state.expectation(None, '1', chi).imag
    return sum(coeff * means[label] for label, coeff in combination.items())


def analytic_slope(cfg, params):
    """
    d<signal>/dphi at phi = 0, exact for any N and n.

    unmatched  -1/2 sum_k C_n(chi g_k)
    matched    -(n/2) sum_k sin(chi g_k/2) C_n(chi g_k) prod_{j!=k} cos(chi g_j/2)
    stored     +(n/2) sum_k sin(chi g_k/2) C_{n-1}(chi g_k)
    with C_m(theta) = cos^m(theta/2).
    """
    n, chi, g = cfg.n_photons, params.chi, cfg.weights
    protocol = params.protocol
    if protocol is Protocol.UNMATCHED:
        if chi == 0.0:
            raise DegenerateProtocolError("F'_z is undefined at chi = 0")
        return -0.5 * float(np.sum(css_char(chi * g, n)))

    sines = np.sin(0.5 * chi * g)
    if protocol is Protocol.MATCHED:
        others = leave_one_out_products(np.cos(0.5 * chi * g))
        return -0.5 * n * float(np.sum(sines * css_char(chi * g, n) * others))
    return 0.5 * n * float(np.sum(sines * css_char(chi * g, n - 1)))


def conditioned_terms(cfg):
    return cfg.n_atoms * (cfg.n_photons + 1)


def signal_slope(cfg, params, h=None, slope='auto', max_terms=None):
    """Slope of the readout signal at phi = 0 by the requested method."""
    if slope not in SLOPE_MODES:
        raise ParameterError(f"slope must be one of {', '.join(SLOPE_MODES)}, got {slope!r}")
    if max_terms is None:
        max_terms = settings.QND_METROLOGY['ORACLE_CONDITIONED_MAX_TERMS']

    if slope == 'auto':
        slope = 'richardson' if conditioned_terms(cfg) <= max_terms else 'analytic'
        logger.debug("signal_slope: %s (N(n+1)=%d)", slope, conditioned_terms(cfg))

    if slope == 'analytic':
        return analytic_slope(cfg, params)
    value, _ = central_slope(lambda phi: signal_mean(cfg, params.at_phi(phi)), h)
    return value


def noise_components(protocol, moments, n_photons, chi):
    """
    Split of the readout noise into (shot, entanglement, inhomogeneity).

    Photon readouts are referred to F_z units through 2/(n chi). Entanglement
    is the coherent-state probe noise; inhomogeneity is what remains.
    """
    protocol = Protocol(protocol)
    scale = (2.0 / (n_photons * chi)) ** 2
    if protocol is Protocol.UNMATCHED:
        shot = moments.variance('F_z')
        entanglement = scale * n_photons / 4.0
        return shot, entanglement, scale * moments.variance('S_y') - shot - entanglement

    probe = n_photons / 2.0 if protocol is Protocol.MATCHED else n_photons / 4.0
    entanglement = scale * probe
    return 0.0, entanglement, scale * moments.variance(protocol.signal_label) - entanglement


def phase_error_result(cfg, params, variance, slope, moments):
    """PhaseErrorResult from a signal variance and slope at phi = 0."""
    if slope == 0.0 or not math.isfinite(slope):
        raise DegenerateProtocolError(
            f"{params.protocol.value} signal has slope {slope} at phi = 0; the phase error is undefined"
        )
    shot, entanglement, inhomogeneity = noise_components(params.protocol, moments, cfg.n_photons, params.chi)
    _, dg2 = empirical_disorder(cfg.weights)
    return PhaseErrorResult(
        delta_phi=math.sqrt(max(variance, 0.0)) / abs(slope),
        shot_noise=shot,
        entanglement_noise=entanglement,
        inhomogeneity_noise=inhomogeneity,
        n_atoms=cfg.n_atoms,
        regime=check_regime(cfg, params),
        protocol=params.protocol,
        xi=params.xi(cfg.n_photons),
        dg2=dg2,
    )


def exact_delta_phi(cfg, params, h=None, slope='auto', max_terms=None):
    """
    delta_phi = sqrt(Var(signal)) / |d<signal>/dphi| at phi = 0.

    ``slope`` selects the Richardson finite difference over exact means, the
    analytic derivative, or ("auto") the finite difference while
    N (n + 1) <= ORACLE_CONDITIONED_MAX_TERMS.
    """
    if params.chi == 0.0:
        raise DegenerateProtocolError("chi = 0: the QND interaction acquires no signal")
    params = params.at_phi(0.0)
    moments = exact_moments(cfg, params)
    variance = moments.variance(params.protocol.signal_label)
    value = signal_slope(cfg, params, h=h, slope=slope, max_terms=max_terms)
    return phase_error_result(cfg, params, variance, value, moments)
