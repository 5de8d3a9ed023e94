"""
RunConfig: everything a command needs to reproduce its output.

Values come from three layers, later ones winning: command defaults, an
optional config file, explicit command-line flags. The config file is plain
text with one ``section.key = value`` per line; ``#`` starts a comment.

    ensemble.n_atoms = 3
    ensemble.n_photons = 400
    protocol.name = matched
    protocol.xi = 1.0
    disorder.distribution = gaussian
    disorder.dg2 = 0.25
    grid.xi = 0.25:2:4,log
"""
import dataclasses
import itertools
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from django.conf import settings

from ensembles.domain import CouplingDistribution, CouplingKind, Protocol, ProtocolParams
from ensembles.exceptions import ParameterError

INTEGER_PARAMETERS = ('n_atoms', 'n_photons')

GRID_PATTERN = re.compile(
    r'^\s*(?P<name>[a-z_0-9]+)\s*=\s*(?P<start>[^:]+):(?P<stop>[^:]+):(?P<steps>[^:,]*)(?P<log>,\s*log)?\s*$'
)

# config-file key -> RunConfig field
FILE_KEYS = {
    'ensemble.n_atoms': 'n_atoms',
    'ensemble.n_photons': 'n_photons',
    'ensemble.distribution': 'distribution',
    'ensemble.dg2': 'dg2',
    'ensemble.seed': 'seed',
    'protocol.name': 'protocol',
    'protocol.xi': 'xi',
    'protocol.chi': 'chi',
    'protocol.phi': 'phi',
    'protocol.step': 'step',
    'disorder.distribution': 'distribution',
    'disorder.dg2': 'dg2',
    'disorder.seed': 'seed',
    'disorder.samples': 'samples',
    'disorder.quantity': 'quantity',
    'disorder.evaluator': 'evaluator',
    'disorder.workers': 'workers',
    'simulation.cap': 'cap',
}

FIELD_TYPES = {
    'n_atoms': int,
    'n_photons': int,
    'distribution': str,
    'dg2': float,
    'seed': int,
    'protocol': str,
    'xi': float,
    'chi': float,
    'phi': float,
    'step': float,
    'samples': int,
    'quantity': str,
    'evaluator': str,
    'workers': int,
    'cap': int,
}

EVALUATORS = ('formula', 'oracle', 'simulation')

DEFAULTS = {
    'n_atoms': 4,
    'n_photons': 1024,
    'distribution': None,
    'dg2': 0.0,
    'seed': 0,
    'protocol': Protocol.MATCHED.value,
    'xi': 1.0,
    'chi': None,
    'phi': 0.0,
    'step': None,
    'samples': None,
    'quantity': None,
    'evaluator': 'oracle',
    'workers': None,
    'cap': None,
}


@dataclass(frozen=True)
class GridAxis:
    name: str
    values: tuple
    spec: str


def parse_grid(spec, allowed=None):
    """
    Parse ``name=start:stop:steps[,log]`` into a GridAxis.

    steps evenly spaced values from start to stop inclusive, geometrically
    spaced with ``log``. Zero or missing steps is an empty grid.
    """
    match = GRID_PATTERN.match(spec)
    if not match:
        raise ParameterError(f"Grid {spec!r} is not of the form name=start:stop:steps[,log]")
    name = match['name']
    if allowed is not None and name not in allowed:
        raise ParameterError(f"Cannot grid over {name!r}; allowed: {', '.join(allowed) or 'none'}")
    if not match['steps'].strip():
        raise ParameterError(f"Grid {spec!r} is empty: no step count")
    try:
        start, stop = float(match['start']), float(match['stop'])
        steps = int(match['steps'])
    except ValueError:
        raise ParameterError(f"Grid {spec!r} has a non-numeric bound or step count") from None
    if steps < 1:
        raise ParameterError(f"Grid {spec!r} is empty: {steps} steps")

    if match['log']:
        if start <= 0 or stop <= 0:
            raise ParameterError(f"Logarithmic grid {spec!r} needs positive bounds")
        values = np.geomspace(start, stop, steps)
    else:
        values = np.linspace(start, stop, steps)
    if name in INTEGER_PARAMETERS:
        values = [int(round(v)) for v in values]
    else:
        values = [float(v) for v in values]
    return GridAxis(name, tuple(values), spec.strip())


def grid_points(axes):
    """Cartesian product of the axes, first axis outermost; one empty point without axes."""
    if not axes:
        return [{}]
    names = [axis.name for axis in axes]
    if len(set(names)) != len(names):
        raise ParameterError(f"Grid axes repeat a parameter: {', '.join(names)}")
    return [dict(zip(names, values)) for values in itertools.product(*(axis.values for axis in axes))]


def read_config_file(path):
    """Returns ({field: raw string}, [grid spec, ...]) from a key = value file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ParameterError(f"Cannot read config file {path}: {e}") from e

    values, grids = {}, []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ParameterError(f"{path}:{number}: expected 'section.key = value'")
        if key.startswith('grid.'):
            grids.append(f"{key[len('grid.'):]}={value}")
        elif key in FILE_KEYS:
            values[FILE_KEYS[key]] = value
        else:
            raise ParameterError(f"{path}:{number}: unknown key {key!r}")
    return values, grids


def _coerce(field, value):
    if value is None:
        return None
    try:
        return FIELD_TYPES[field](value)
    except (TypeError, ValueError):
        raise ParameterError(f"{field} = {value!r} is not a valid {FIELD_TYPES[field].__name__}") from None


@dataclass(frozen=True)
class RunConfig:
    command: str
    n_atoms: int
    n_photons: int | None
    distribution: CouplingKind
    dg2: float
    seed: int
    protocol: Protocol
    xi: float
    chi: float | None
    phi: float
    step: float | None
    samples: int | None
    quantity: str | None
    evaluator: str
    workers: int
    cap: int
    grid: tuple = ()

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ParameterError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if self.n_photons is not None and self.n_photons < 1:
            raise ParameterError(f"n_photons must be >= 1, got {self.n_photons}")
        if self.samples is not None and self.samples < 2:
            raise ParameterError(f"samples must be >= 2, got {self.samples}")
        if self.step is not None and not self.step > 0:
            raise ParameterError(f"step must be positive, got {self.step}")
        if self.cap < 1:
            raise ParameterError(f"cap must be positive, got {self.cap}")
        if self.workers < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")
        if self.evaluator not in EVALUATORS:
            raise ParameterError(f"evaluator must be one of {', '.join(EVALUATORS)}, got {self.evaluator!r}")

    @property
    def points(self):
        return grid_points(self.grid)

    def resolve(self, point):
        """A copy with the grid point's values substituted."""
        changes = {name: value for name, value in point.items() if name in FIELD_TYPES}
        if 'xi' in point:
            changes['chi'] = None
        return dataclasses.replace(self, grid=(), **changes)

    def xi_value(self, n_photons=None):
        n_photons = self.n_photons if n_photons is None else n_photons
        if self.chi is None:
            return self.xi
        return n_photons * self.chi * self.chi / 4.0

    def params(self):
        """ProtocolParams; an explicit chi wins over xi."""
        if self.chi is not None:
            return ProtocolParams(chi=self.chi, phi=self.phi, protocol=self.protocol)
        return ProtocolParams.from_xi(self.xi, self.n_photons, protocol=self.protocol, phi=self.phi)

    def distribution_for(self, seed=None):
        return CouplingDistribution(self.distribution, variance=self.dg2, seed=self.seed if seed is None else seed)

    def to_dict(self):
        return {
            'command': self.command,
            'n_atoms': self.n_atoms,
            'n_photons': self.n_photons,
            'distribution': self.distribution.value,
            'dg2': self.dg2,
            'seed': self.seed,
            'protocol': self.protocol.value,
            'xi': self.xi,
            'chi': self.chi,
            'phi': self.phi,
            'step': self.step,
            'samples': self.samples,
            'quantity': self.quantity,
            'evaluator': self.evaluator,
            'workers': self.workers,
            'cap': self.cap,
            'grid': [axis.spec for axis in self.grid],
        }


def build_run_config(command, options, defaults=None, grid_names=()):
    """
    RunConfig from command defaults, the ``config`` file option and explicit flags.

    ``options`` holds flag values keyed by RunConfig field; None means not given.
    Grid flags replace any grid read from the file.
    """
    values = dict(DEFAULTS)
    values.update(defaults or {})
    grid_specs = []
    if options.get('config'):
        file_values, grid_specs = read_config_file(options['config'])
        values.update({field: _coerce(field, raw) for field, raw in file_values.items()})
    for field in FIELD_TYPES:
        if options.get(field) is not None:
            values[field] = _coerce(field, options[field])
    if options.get('grid'):
        grid_specs = list(options['grid'])

    knobs = settings.QND_METROLOGY
    if values['cap'] is None:
        values['cap'] = knobs['AMPLITUDE_CAP']
    if values['workers'] is None:
        values['workers'] = knobs['WORKERS']
    grid = tuple(parse_grid(spec, grid_names) for spec in grid_specs)
    if values['distribution'] is None:
        disordered = values['dg2'] > 0 or any(axis.name == 'dg2' for axis in grid)
        values['distribution'] = CouplingKind.GAUSSIAN if disordered else CouplingKind.UNIFORM_UNIT
    if values['dg2'] < 0:
        raise ParameterError(f"dg2 must be non-negative, got {values['dg2']}")
    if values['xi'] < 0:
        raise ParameterError(f"xi must be non-negative, got {values['xi']}")

    try:
        values['distribution'] = CouplingKind(values['distribution'])
        values['protocol'] = Protocol(values['protocol'])
    except ValueError as e:
        raise ParameterError(str(e)) from None

    config = RunConfig(command=command, grid=grid, **values)
    grid_points(config.grid)
    return config
