"""
Exact simulation of the protocols, cross-checked against the moment oracle and
the closed forms at the drawn weights' empirical disorder.

    python manage.py qnd_simulate --n-atoms 3 --n-photons 400 --protocol matched
"""
import math

from ensembles.domain import EnsembleConfig
from experiments.management.base import QNDCommand
from experiments.services.tables import Column, Table
from formulas.services.phase_error import delta_phi
from oracle.services.moment_oracle import exact_delta_phi
from simulator.services.state_vector import run_protocol


def relative_deviation(value, reference):
    if reference == 0.0:
        return math.inf if value else 0.0
    return abs(value - reference) / abs(reference)


class Command(QNDCommand):
    help = 'Simulate a protocol exactly and compare with the moment oracle and the closed forms'

    defaults = {'n_atoms': 3, 'n_photons': 400}
    grid_names = ('xi', 'chi', 'dg2', 'n_atoms', 'n_photons')

    def build_table(self, config):
        table = Table([
            Column('n_atoms'),
            Column('n_photons'),
            Column('xi'),
            Column('chi', 'rad'),
            Column('dg2'),
            Column('mean_weight'),
            Column('protocol'),
            Column('seed'),
            Column('delta_phi_sim', 'rad'),
            Column('delta_phi_oracle', 'rad'),
            Column('delta_phi_formula', 'rad'),
            Column('dev_sim_oracle'),
            Column('dev_sim_formula'),
            Column('dev_oracle_formula'),
            Column('eta_sim'),
            Column('regime_ok'),
        ])
        for index, point in enumerate(config.points):
            run = config.resolve(point)
            seed = config.seed ^ index
            cfg = EnsembleConfig.build(run.n_atoms, run.n_photons, run.distribution_for(seed))
            params = run.params()

            simulated = run_protocol(cfg, params, h=run.step, cap=run.cap)
            oracle = exact_delta_phi(cfg, params, h=run.step, slope='richardson')
            dg2 = cfg.weight_variance
            xi = params.xi(cfg.n_photons)
            formula = delta_phi(params.protocol, xi, dg2, cfg.n_atoms, n_photons=cfg.n_photons)

            table.add(
                n_atoms=cfg.n_atoms,
                n_photons=cfg.n_photons,
                xi=xi,
                chi=params.chi,
                dg2=dg2,
                mean_weight=cfg.mean_weight,
                protocol=params.protocol.value,
                seed=seed,
                delta_phi_sim=simulated.delta_phi,
                delta_phi_oracle=oracle.delta_phi,
                delta_phi_formula=formula.delta_phi,
                dev_sim_oracle=relative_deviation(simulated.delta_phi, oracle.delta_phi),
                dev_sim_formula=relative_deviation(simulated.delta_phi, formula.delta_phi),
                dev_oracle_formula=relative_deviation(oracle.delta_phi, formula.delta_phi),
                eta_sim=simulated.eta,
                regime_ok=simulated.regime.all_satisfied,
            )
        return table
