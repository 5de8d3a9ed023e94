"""
Disorder-averaged quantities over a parameter grid

    python manage.py qnd_disorder --n-atoms 1000 --n-photons 100000000 --evaluator formula \
        --grid "dg2=0.001:0.1:9,log" --samples 200 --seed 7
"""
from django.conf import settings

from disorder.services.monte_carlo import GRID_KEYS, apply_point, sweep
from disorder.services.quantities import get_quantity
from ensembles.domain import EnsembleConfig
from experiments.management.base import QNDCommand
from experiments.services.tables import Column, Table


class Command(QNDCommand):
    help = 'Monte Carlo average of a quantity over coupling disorder at every grid point'

    grid_names = GRID_KEYS

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--samples', type=int, help='Weight draws per grid point')
        parser.add_argument('--quantity', help='Quantity to average; defaults to delta_phi_<evaluator>')
        parser.add_argument('--evaluator', choices=['formula', 'oracle', 'simulation'])
        parser.add_argument('--workers', type=int, help='Worker processes per grid point')

    def build_table(self, config):
        quantity = get_quantity(config.quantity or f'delta_phi_{config.evaluator}')
        samples = config.samples
        if samples is None:
            knobs = settings.QND_METROLOGY
            samples = knobs['DISORDER_SAMPLES'] if quantity.is_phase_error else knobs['SCALAR_SAMPLES']

        dist = config.distribution_for()
        base = EnsembleConfig.uniform(config.n_atoms, config.n_photons)
        params = config.params()
        rows = sweep(config.points, dist, samples, base, params, quantity, workers=config.workers, cap=config.cap)

        table = Table([
            Column('n_atoms'),
            Column('n_photons'),
            Column('dg2'),
            Column('xi'),
            Column('chi', 'rad'),
            Column('phi', 'rad'),
            Column('quantity'),
            Column('protocol'),
            Column('mean'),
            Column('std_error'),
            Column('n_samples'),
            Column('seed'),
            Column('mean_variance'),
            Column('mean_slope'),
            Column('error'),
        ])
        for row in rows:
            point_dist, point_base, point_params = apply_point(row.point, dist, base, params)
            stats = row.stats
            table.add(
                n_atoms=point_base.n_atoms,
                n_photons=point_base.n_photons,
                dg2=point_dist.variance,
                xi=point_params.xi(point_base.n_photons),
                chi=point_params.chi,
                phi=point_params.phi,
                quantity=quantity.name,
                protocol=point_params.protocol.value,
                mean=stats.mean if stats else None,
                std_error=stats.std_error if stats else None,
                n_samples=stats.n_samples if stats else samples,
                seed=row.seed,
                mean_variance=stats.mean_variance if stats else None,
                mean_slope=stats.mean_slope if stats else None,
                error=row.error,
            )
        return table
