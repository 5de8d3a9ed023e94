"""
Quantities that can be averaged over coupling disorder.

Each evaluator receives one sampled EnsembleConfig and the ProtocolParams and
returns either a scalar or, for phase errors, the pair (variance, slope) of
the readout signal at phi = 0 so that moments can be averaged before the
ratio is formed.
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ensembles.exceptions import DegenerateProtocolError, DescriptorError
from ensembles.services.weights import empirical_disorder
from formulas.services.phase_error import signal_moments
from oracle.services.moment_oracle import exact_moments, signal_slope
from simulator.services.state_vector import signal_statistics

SCALAR = 'scalar'
PHASE_ERROR = 'phase_error'


@dataclass(frozen=True)
class Quantity:
    name: str
    kind: str
    evaluate: Callable
    description: str = ''

    @property
    def is_phase_error(self):
        return self.kind == PHASE_ERROR


def signal_factor(cfg, params, cap=None):
    """Atom average of exp(-xi g_k^2 / 2)."""
    xi = params.xi(cfg.n_photons)
    return float(np.mean(np.exp(-0.5 * xi * cfg.weights ** 2)))


def empirical_dg2(cfg, params, cap=None):
    return empirical_disorder(cfg.weights)[1]


def formula_moments(cfg, params, cap=None):
    """Closed-form signal moments at the sample's empirical disorder."""
    _, dg2 = empirical_disorder(cfg.weights)
    return signal_moments(params.protocol, params.xi(cfg.n_photons), dg2, cfg.n_atoms, cfg.n_photons)


def oracle_moments(cfg, params, cap=None):
    """Exact variance with the analytic slope; O(N) per sample for any n."""
    if params.chi == 0.0:
        raise DegenerateProtocolError("chi = 0: the QND interaction acquires no signal")
    params = params.at_phi(0.0)
    variance = exact_moments(cfg, params).variance(params.protocol.signal_label)
    return variance, signal_slope(cfg, params, slope='analytic')


def simulation_moments(cfg, params, cap=None):
    variance, slope, _ = signal_statistics(cfg, params, cap=cap)
    return variance, slope


QUANTITIES = {
    quantity.name: quantity
    for quantity in (
        Quantity('signal_factor', SCALAR, signal_factor, 'atom-averaged exp(-xi g^2/2)'),
        Quantity('empirical_dg2', SCALAR, empirical_dg2, 'population variance of the drawn weights'),
        Quantity('delta_phi_formula', PHASE_ERROR, formula_moments, 'closed forms at the empirical dg2'),
        Quantity('delta_phi_oracle', PHASE_ERROR, oracle_moments, 'exact moments, analytic slope'),
        Quantity('delta_phi_simulation', PHASE_ERROR, simulation_moments, 'state-vector simulation'),
    )
}


def get_quantity(name):
    if isinstance(name, Quantity):
        return name
    try:
        return QUANTITIES[name]
    except KeyError:
        raise DescriptorError(
            f"Unknown quantity {name!r}; available: {', '.join(QUANTITIES)}"
        ) from None
