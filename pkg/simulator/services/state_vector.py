"""
State-vector simulation of the three readout protocols.

Atoms use the full 2^N product basis; each probe pulse lives on its Dicke
ladder of n + 1 levels, which is exact because the probes only couple through
their collective S_z and start fully symmetric.
"""
import logging
import math

import numpy as np
from django.conf import settings

from ensembles.domain import Protocol
from ensembles.exceptions import CapacityError, DegenerateProtocolError, ParameterError
from ensembles.services.dicke import css_amplitudes, sz_eigenvalues
from oracle.domain import MomentSet, composite_combinations
from oracle.services.derivatives import central_slope
from oracle.services.moment_oracle import phase_error_result

from ..domain import NORM_TOLERANCE, QuantumState, StateDims
from .observables import apply_observable, atomic_z_diagonal, base_observables, readout_signal

logger = logging.getLogger(__name__)

STAGE_INITIAL = 'initial'
STAGE_QND = 'qnd'
STAGE_ROTATION = 'rotation'
STAGE_SECOND_QND = 'qnd_second'
STAGE_REVERSED_QND = 'qnd_reversed'


def check_capacity(n_atoms, n_photons, pulses, cap=None):
    """
    Raise CapacityError unless N <= MAX_ATOMS and 2^N (n+1)^pulses <= cap.
    """
    knobs = settings.QND_METROLOGY
    cap = knobs['AMPLITUDE_CAP'] if cap is None else int(cap)
    dims = StateDims(int(n_atoms), int(n_photons), int(pulses))
    if dims.n_atoms > knobs['MAX_ATOMS']:
        raise CapacityError(
            f"N = {dims.n_atoms} atoms exceeds MAX_ATOMS = {knobs['MAX_ATOMS']}",
            dimension='atoms', required=dims.n_atoms, cap=knobs['MAX_ATOMS'],
        )
    if dims.size > cap:
        raise CapacityError(
            f"State of shape {dims.describe()} needs {dims.size} amplitudes, cap is {cap}",
            dimension=dims.describe(), required=dims.size, cap=cap,
        )
    return dims


def initial_state(cfg, pulses, cap=None):
    """Every atom in (|up> + |down>)/sqrt(2), every pulse in the x-polarised coherent state."""
    if pulses not in (1, 2):
        raise ParameterError(f"pulses must be 1 or 2, got {pulses}")
    dims = check_capacity(cfg.n_atoms, cfg.n_photons, pulses, cap)
    amplitudes = np.full(2 ** cfg.n_atoms, 2.0 ** (-cfg.n_atoms / 2.0), dtype=complex)
    probe = css_amplitudes(cfg.n_photons)
    for _ in range(pulses):
        amplitudes = np.multiply.outer(amplitudes, probe)
    return QuantumState(amplitudes, dims)


def apply_qnd(state, chi, cfg, pulse=0, sign=1):
    """Multiply every amplitude by exp(-i sign chi m_pulse Ft_z(config)) in one pass."""
    if pulse < 0 or pulse >= state.dims.pulses:
        raise ParameterError(f"State has no probe pulse {pulse}")
    if chi == 0.0:
        return state.copy()
    ft = atomic_z_diagonal(cfg.weights)
    levels = sz_eigenvalues(state.dims.n_photons)
    shape_ft = (-1,) + (1,) * state.dims.pulses
    shape_m = [1] * (1 + state.dims.pulses)
    shape_m[1 + pulse] = -1
    phase = np.exp(-1j * sign * chi * ft.reshape(shape_ft) * levels.reshape(shape_m))
    return state.with_amplitudes(state.amplitudes * phase)


def rotation_matrix(phi):
    """exp(-i phi f_y) in the (up, down) basis."""
    c, s = math.cos(0.5 * phi), math.sin(0.5 * phi)
    return np.array([[c, -s], [s, c]])


def apply_rotation(state, phi):
    """exp(-i phi F_y) as N independent single-atom rotations."""
    if phi == 0.0:
        return state.copy()
    n_atoms = state.dims.n_atoms
    rest = state.amplitudes.shape[1:]
    split = state.amplitudes.reshape((2,) * n_atoms + rest)
    rotation = rotation_matrix(phi)
    for k in range(n_atoms):
        split = np.moveaxis(np.tensordot(rotation, split, axes=([1], [k])), 0, k)
    return state.with_amplitudes(np.ascontiguousarray(split).reshape(state.amplitudes.shape))


def expectation(state, observable):
    return float(np.real(np.vdot(state.amplitudes, apply_observable(observable, state))))


def covariance(state, observable_a, observable_b):
    """Symmetrised covariance (<AB + BA>/2 - <A><B>) of two Hermitian observables."""
    applied_a = apply_observable(observable_a, state)
    applied_b = apply_observable(observable_b, state)
    mean_a = float(np.real(np.vdot(state.amplitudes, applied_a)))
    mean_b = float(np.real(np.vdot(state.amplitudes, applied_b)))
    return float(np.real(np.vdot(applied_a, applied_b))) - mean_a * mean_b


def _check_norm(state, stage):
    drift = abs(state.norm - 1.0)
    if drift > NORM_TOLERANCE:
        logger.warning("State norm drifted by %.3e after %s", drift, stage)


def stage_states(cfg, params, cap=None):
    """
    Yield (stage, state) after every unitary of the protocol sequence.

    unmatched  initial, qnd, rotation
    matched    initial, qnd, rotation, qnd_second
    stored     initial, qnd, rotation, qnd_reversed
    """
    protocol = params.protocol
    state = initial_state(cfg, protocol.pulses, cap)
    yield STAGE_INITIAL, state

    state = apply_qnd(state, params.chi, cfg, pulse=0, sign=1)
    _check_norm(state, STAGE_QND)
    yield STAGE_QND, state

    state = apply_rotation(state, params.phi)
    _check_norm(state, STAGE_ROTATION)
    yield STAGE_ROTATION, state

    if protocol is Protocol.MATCHED:
        state = apply_qnd(state, params.chi, cfg, pulse=1, sign=1)
        _check_norm(state, STAGE_SECOND_QND)
        yield STAGE_SECOND_QND, state
    elif protocol is Protocol.STORED:
        state = apply_qnd(state, params.chi, cfg, pulse=0, sign=-1)
        _check_norm(state, STAGE_REVERSED_QND)
        yield STAGE_REVERSED_QND, state


def final_state(cfg, params, cap=None):
    state = None
    for _, state in stage_states(cfg, params, cap):
        pass
    return state


def simulate_moments(cfg, params, cap=None):
    """MomentSet of the final state, labelled like the moment oracle's."""
    state = final_state(cfg, params, cap)
    observables = base_observables(cfg, params.protocol)
    applied = [apply_observable(obs, state) for obs in observables]
    means = [np.real(np.vdot(state.amplitudes, vector)) for vector in applied]
    second = [[np.real(np.vdot(a, b)) for b in applied] for a in applied]
    return MomentSet.from_raw(
        [obs.label for obs in observables],
        means,
        second,
        at_phi=params.phi,
        protocol=params.protocol,
        composites=composite_combinations(params.protocol, cfg.n_photons, params.chi),
    )


def signal_expectation(cfg, params, cap=None):
    signal = readout_signal(cfg, params.protocol, params.chi)
    return expectation(final_state(cfg, params, cap), signal)


def signal_statistics(cfg, params, h=None, cap=None):
    """
    (variance at phi = 0, slope at phi = 0, MomentSet) of the readout signal.

    The slope comes from Richardson central differences of the simulated mean
    signal at phi = +-h, +-h/2.
    """
    params = params.at_phi(0.0)
    if params.chi == 0.0:
        raise DegenerateProtocolError("chi = 0: the QND interaction acquires no signal")
    check_capacity(cfg.n_atoms, cfg.n_photons, params.protocol.pulses, cap)

    moments = simulate_moments(cfg, params, cap)
    variance = moments.variance(params.protocol.signal_label)
    slope, _ = central_slope(lambda phi: signal_expectation(cfg, params.at_phi(phi), cap), h)
    logger.debug("%s signal: variance %.6e slope %.6e", params.protocol.value, variance, slope)
    return variance, slope, moments


def run_protocol(cfg, params, h=None, cap=None):
    """Simulate the protocol and return its phase error."""
    variance, slope, moments = signal_statistics(cfg, params, h, cap)
    return phase_error_result(cfg, params.at_phi(0.0), variance, slope, moments)
