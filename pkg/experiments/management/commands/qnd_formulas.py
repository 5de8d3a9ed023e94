"""
Closed-form phase errors over a grid of (xi, dg2, N)

    python manage.py qnd_formulas --protocol matched --grid "xi=0.1:10:21,log" --n-atoms 100
"""
from ensembles.domain import RegimeReport
from ensembles.exceptions import ParameterError
from experiments.management.base import QNDCommand
from experiments.services.tables import Column, Table
from formulas.services.phase_error import delta_phi, is_extrapolated


def formula_table():
    columns = [
        Column('xi'),
        Column('dg2'),
        Column('n_atoms'),
        Column('protocol'),
        Column('delta_phi', 'rad'),
        Column('eta'),
        Column('shot', 'Var(F_z)'),
        Column('entanglement', 'Var(F_z)'),
        Column('inhomogeneity', 'Var(F_z)'),
    ]
    columns += [Column(f'{margin}_ok') for margin in RegimeReport.MARGINS]
    columns += [Column('extrapolated'), Column('notes')]
    return Table(columns)


class Command(QNDCommand):
    help = 'Tabulate the closed-form phase errors of one protocol over a (xi, dg2, n_atoms) grid'

    defaults = {'n_atoms': 100, 'n_photons': None}
    grid_names = ('xi', 'dg2', 'n_atoms')

    def build_table(self, config):
        table = formula_table()
        for point in config.points:
            run = config.resolve(point)
            if run.chi is not None and run.n_photons is None:
                raise ParameterError("--chi needs --n-photons to convert to xi")
            xi = run.xi_value()
            result = delta_phi(run.protocol, xi, run.dg2, run.n_atoms, n_photons=run.n_photons)
            flags = result.regime.flags
            table.add(
                xi=xi,
                dg2=run.dg2,
                n_atoms=run.n_atoms,
                protocol=run.protocol.value,
                delta_phi=result.delta_phi,
                eta=result.eta,
                shot=result.shot_noise,
                entanglement=result.entanglement_noise,
                inhomogeneity=result.inhomogeneity_noise,
                extrapolated=is_extrapolated(xi, run.dg2),
                notes=';'.join(result.notes),
                **{f'{margin}_ok': flag for margin, flag in flags.items()},
            )
        return table
