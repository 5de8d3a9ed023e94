"""
Squeezing parameters of the atoms after every stage of a protocol, next to
the phase error of the whole protocol.

    python manage.py qnd_squeezing --n-atoms 4 --n-photons 1024 --xi 1
"""
import logging
import math

from ensembles.domain import EnsembleConfig
from ensembles.exceptions import DegenerateProtocolError
from experiments.management.base import QNDCommand
from experiments.services.tables import Column, Table
from simulator.services.reduced import stage_squeezing
from simulator.services.state_vector import run_protocol

logger = logging.getLogger(__name__)


class Command(QNDCommand):
    help = 'Kitagawa-Ueda and Wineland parameters at each protocol stage, with the protocol phase error'

    defaults = {'n_atoms': 4, 'n_photons': 1024, 'protocol': 'stored'}

    def build_table(self, config):
        cfg = EnsembleConfig.build(config.n_atoms, config.n_photons, config.distribution_for())
        params = config.params()

        stages = stage_squeezing(cfg, params, cap=config.cap)
        try:
            phase_error = run_protocol(cfg, params, h=config.step, cap=config.cap).delta_phi
        except DegenerateProtocolError as e:
            logger.info("No phase estimate: %s", e)
            phase_error = math.inf

        table = Table([
            Column('stage'),
            Column('xi_ku2'),
            Column('xi_w2'),
            Column('purity'),
            Column('mean_spin_degenerate'),
            Column('delta_phi', 'rad'),
            Column('eta'),
        ])
        eta = math.sqrt(cfg.n_atoms) * phase_error
        for stage in stages:
            table.add(
                stage=stage.stage,
                xi_ku2=stage.squeezing.xi_ku2,
                xi_w2=stage.squeezing.xi_w2,
                purity=stage.purity,
                mean_spin_degenerate=stage.squeezing.mean_spin_degenerate,
                delta_phi=phase_error,
                eta=eta,
            )
        return table
