"""
Shared plumbing of the qnd_* management commands: the common flag set,
RunConfig assembly, exit codes and output.
"""
import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from ensembles.domain import CouplingKind, Protocol
from ensembles.exceptions import (
    CapacityError,
    DegenerateProtocolError,
    DescriptorError,
    DivergenceError,
    MeanSpinDegenerateError,
    ParameterError,
    QNDError,
)
from experiments.models import ExperimentRun
from experiments.services.run_config import build_run_config
from experiments.services.tables import digest, render

logger = logging.getLogger(__name__)

EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_CAPACITY = 3
EXIT_DEGENERATE = 4


def exit_code_for(error):
    if isinstance(error, CapacityError):
        return EXIT_CAPACITY
    if isinstance(error, (DegenerateProtocolError, DivergenceError, MeanSpinDegenerateError)):
        return EXIT_DEGENERATE
    if isinstance(error, (ParameterError, DescriptorError)):
        return EXIT_USAGE
    return EXIT_FAILURE


class QNDCommand(BaseCommand):
    """
    Base for the table-producing commands.

    Subclasses set ``defaults`` (RunConfig overrides), ``grid_names`` (parameters
    that may be gridded) and implement ``build_table(config)``.
    """
    defaults = {}
    grid_names = ()

    @property
    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def add_arguments(self, parser):
        parser.add_argument('--config', help='Run configuration file of "section.key = value" lines')
        parser.add_argument('--out', help='Write the table to this path instead of stdout')
        parser.add_argument('--json', action='store_true', help='Emit the rows as a JSON array')
        parser.add_argument('--seed', type=int, help='Unsigned 64-bit seed for coupling weights')
        parser.add_argument(
            '--grid', action='append',
            help='name=start:stop:steps[,log]; repeat the flag for a product grid',
        )
        parser.add_argument('--protocol', choices=[p.value for p in Protocol])
        parser.add_argument('--cap', type=int, help='Largest number of amplitudes a simulated state may hold')
        parser.add_argument('--xi', type=float, help='Interaction parameter n chi^2 / 4')
        parser.add_argument('--chi', type=float, help='Interaction angle; overrides --xi')
        parser.add_argument('--phi', type=float, help='Rotation angle (rad)')
        parser.add_argument('--dg2', type=float, help='Coupling-weight variance')
        parser.add_argument('--n-atoms', type=int, dest='n_atoms')
        parser.add_argument('--n-photons', type=int, dest='n_photons')
        parser.add_argument('--distribution', choices=[k.value for k in CouplingKind])
        parser.add_argument('--step', type=float, help='Finite-difference step for signal slopes')
        parser.add_argument('--record', action='store_true', help='Store the run as an ExperimentRun')

    def build_table(self, config):
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            config = build_run_config(self.command_name, options, self.defaults, self.grid_names)
            table = self.build_table(config)
        except QNDError as e:
            logger.error("%s failed: %s", self.command_name, e)
            raise CommandError(str(e), returncode=exit_code_for(e)) from e

        as_json = bool(options.get('json'))
        text = render(table, config, as_json=as_json)
        if options.get('out'):
            path = Path(options['out'])
            path.write_text(text)
            self.stdout.write(self.style.SUCCESS(f'Wrote {len(table.rows)} rows to {path}'))
        else:
            self.stdout.write(text, ending='')

        if options.get('record'):
            run = ExperimentRun.objects.create(
                command=self.command_name,
                config=config.to_dict(),
                output_format='json' if as_json else 'csv',
                output_sha256=digest(text),
                row_count=len(table.rows),
            )
            logger.info("Recorded %s as run %d", self.command_name, run.id)
