"""
Tests for RunConfig assembly, grid parsing, table rendering and the recorded-run API.
"""
import json
import math
import os
import tempfile

from django.conf import settings
from django.test import SimpleTestCase
from rest_framework import status
from rest_framework.test import APITestCase

from ensembles.domain import CouplingKind, Protocol
from ensembles.exceptions import ParameterError
from .models import ExperimentRun
from .services.run_config import build_run_config, grid_points, parse_grid, read_config_file
from .services.tables import Column, Table, digest, format_value, parse_csv, render_csv, render_json


def write_config(text):
    handle = tempfile.NamedTemporaryFile('w', suffix='.conf', delete=False)
    handle.write(text)
    handle.close()
    return handle.name


class GridTestCase(SimpleTestCase):
    """Tests for grid descriptors"""

    def test_linear(self):
        """Steps are evenly spaced and include both ends"""
        axis = parse_grid('xi=1:2:3')
        self.assertEqual(axis.name, 'xi')
        self.assertEqual(axis.values, (1.0, 1.5, 2.0))

    def test_logarithmic(self):
        """The log flag spaces values geometrically"""
        axis = parse_grid('dg2=0.01:1:3,log')
        for value, expected in zip(axis.values, (0.01, 0.1, 1.0)):
            self.assertAlmostEqual(value, expected, places=12)

    def test_integer_parameters(self):
        """Atom and photon numbers are rounded to integers"""
        axis = parse_grid('n_atoms=10:20:3')
        self.assertEqual(axis.values, (10, 15, 20))
        self.assertTrue(all(isinstance(v, int) for v in axis.values))

    def test_single_step(self):
        """One step is the start value"""
        self.assertEqual(parse_grid('xi=0.5:4:1').values, (0.5,))

    def test_empty_grid_rejected(self):
        """Zero or missing step counts are usage errors"""
        for spec in ('xi=1:2:0', 'xi=1:2:'):
            with self.assertRaises(ParameterError, msg=spec):
                parse_grid(spec)

    def test_malformed_grid_rejected(self):
        """Descriptors must be name=start:stop:steps"""
        for spec in ('xi', 'xi=1:2', 'xi=a:2:3', 'dg2=0:1:3,log'):
            with self.assertRaises(ParameterError, msg=spec):
                parse_grid(spec)

    def test_disallowed_name(self):
        """Only the command's grid parameters may be gridded"""
        with self.assertRaises(ParameterError):
            parse_grid('phi=0:1:3', allowed=('xi', 'dg2'))

    def test_product_order(self):
        """The first axis is outermost"""
        points = grid_points([parse_grid('xi=1:2:2'), parse_grid('n_atoms=10:20:2')])
        self.assertEqual(points, [
            {'xi': 1.0, 'n_atoms': 10},
            {'xi': 1.0, 'n_atoms': 20},
            {'xi': 2.0, 'n_atoms': 10},
            {'xi': 2.0, 'n_atoms': 20},
        ])
        self.assertEqual(grid_points([]), [{}])

    def test_repeated_axis(self):
        """A parameter cannot appear on two axes"""
        with self.assertRaises(ParameterError):
            grid_points([parse_grid('xi=1:2:2'), parse_grid('xi=3:4:2')])


class RunConfigTestCase(SimpleTestCase):
    """Tests for build_run_config"""

    def tearDown(self):
        for path in getattr(self, 'paths', []):
            os.unlink(path)

    def config_file(self, text):
        path = write_config(text)
        self.paths = getattr(self, 'paths', []) + [path]
        return path

    def test_defaults(self):
        """Without a file or flags the command defaults apply"""
        config = build_run_config('qnd_formulas', {}, {'n_atoms': 100})
        self.assertEqual(config.n_atoms, 100)
        self.assertEqual(config.protocol, Protocol.MATCHED)
        self.assertEqual(config.distribution, CouplingKind.UNIFORM_UNIT)
        self.assertEqual(config.cap, settings.QND_METROLOGY['AMPLITUDE_CAP'])
        self.assertEqual(config.workers, settings.QND_METROLOGY['WORKERS'])
        self.assertEqual(config.points, [{}])

    def test_file_then_flags(self):
        """Flags override the file, which overrides the defaults"""
        path = self.config_file(
            "# desk-scale run\n"
            "ensemble.n_atoms = 3\n"
            "ensemble.n_photons = 400   # photons per pulse\n"
            "protocol.name = stored\n"
            "protocol.xi = 2.0\n"
            "disorder.dg2 = 0.25\n"
            "disorder.seed = 9\n"
        )
        config = build_run_config('qnd_simulate', {'config': path, 'xi': 1.5})
        self.assertEqual((config.n_atoms, config.n_photons), (3, 400))
        self.assertEqual(config.protocol, Protocol.STORED)
        self.assertEqual(config.xi, 1.5)
        self.assertEqual(config.seed, 9)
        self.assertEqual(config.distribution, CouplingKind.GAUSSIAN)

    def test_flag_grids_replace_file_grids(self):
        """Grid flags replace every grid read from the file"""
        path = self.config_file("grid.xi = 0.5:2:4\ngrid.dg2 = 0:0.1:2\n")
        from_file = build_run_config('qnd_formulas', {'config': path}, grid_names=('xi', 'dg2'))
        self.assertEqual(len(from_file.points), 8)
        self.assertEqual(from_file.distribution, CouplingKind.GAUSSIAN)

        overridden = build_run_config(
            'qnd_formulas', {'config': path, 'grid': ['n_atoms=10:30:3']}, grid_names=('xi', 'dg2', 'n_atoms'),
        )
        self.assertEqual([axis.name for axis in overridden.grid], ['n_atoms'])

    def test_unknown_file_key(self):
        """Unknown keys in the file are usage errors"""
        path = self.config_file("protocol.temperature = 4\n")
        with self.assertRaises(ParameterError):
            read_config_file(path)

    def test_missing_file(self):
        """An unreadable file is a usage error"""
        with self.assertRaises(ParameterError):
            build_run_config('qnd_formulas', {'config': '/nonexistent/run.conf'})

    def test_invalid_values(self):
        """Bad enum values, types and ranges raise ParameterError"""
        for options in (
            {'protocol': 'teleported'},
            {'distribution': 'lorentzian'},
            {'n_atoms': 0},
            {'dg2': -0.1},
            {'xi': -1.0},
            {'samples': 1},
            {'cap': 0},
            {'step': 0.0},
            {'evaluator': 'guess'},
        ):
            with self.assertRaises(ParameterError, msg=options):
                build_run_config('qnd_disorder', options)

        path = self.config_file("ensemble.n_atoms = many\n")
        with self.assertRaises(ParameterError):
            build_run_config('qnd_formulas', {'config': path})

    def test_resolve_grid_point(self):
        """A gridded xi replaces an explicit chi"""
        config = build_run_config('qnd_simulate', {'chi': 0.1, 'n_photons': 400})
        self.assertAlmostEqual(config.xi_value(), 1.0, places=12)
        resolved = config.resolve({'xi': 2.0, 'n_atoms': 5})
        self.assertIsNone(resolved.chi)
        self.assertEqual(resolved.n_atoms, 5)
        self.assertAlmostEqual(resolved.params().xi(400), 2.0, places=12)

    def test_to_dict_serializable(self):
        """The config echo is plain JSON"""
        config = build_run_config('qnd_disorder', {'grid': ['dg2=0:0.1:3'], 'seed': 5}, grid_names=('dg2',))
        data = json.loads(json.dumps(config.to_dict()))
        self.assertEqual(data['grid'], ['dg2=0:0.1:3'])
        self.assertEqual(data['distribution'], 'gaussian')
        self.assertEqual(data['seed'], 5)


class TableTestCase(SimpleTestCase):
    """Tests for table rendering"""

    def setUp(self):
        self.config = build_run_config('qnd_formulas', {'n_atoms': 10})
        self.table = Table([Column('xi'), Column('delta_phi', 'rad'), Column('ok'), Column('note')])
        self.table.add(xi=1.0, delta_phi=math.sqrt(math.e) / 10, ok=True, note='')

    def test_format_value(self):
        """Floats use nine significant digits in lowercase scientific notation"""
        self.assertEqual(format_value(0.0164872127), '1.64872127e-02')
        self.assertEqual(format_value(3), '3')
        self.assertEqual(format_value(False), 'false')
        self.assertEqual(format_value(None), '')
        self.assertEqual(format_value(math.inf), 'inf')

    def test_csv_layout(self):
        """Two '#' metadata lines, then the header and the rows"""
        lines = render_csv(self.table, self.config).splitlines()
        self.assertTrue(lines[0].startswith('# qnd_formulas {'))
        self.assertEqual(lines[1], '# units: delta_phi=rad')
        self.assertEqual(lines[2], 'xi,delta_phi,ok,note')
        self.assertEqual(lines[3], '1.00000000e+00,1.64872127e-01,true,')
        echo = json.loads(lines[0][len('# qnd_formulas '):])
        self.assertEqual(echo['n_atoms'], 10)

    def test_parse_csv(self):
        """Rendered tables read back as dicts of strings"""
        rows = parse_csv(render_csv(self.table, self.config))
        self.assertEqual(rows, [{'xi': '1.00000000e+00', 'delta_phi': '1.64872127e-01', 'ok': 'true', 'note': ''}])

    def test_json(self):
        """JSON output carries the echo, the units and the rows; non-finite floats become strings"""
        self.table.add(xi=0.0, delta_phi=math.inf, ok=False, note='diverges')
        document = json.loads(render_json(self.table, self.config))
        self.assertEqual(document['command'], 'qnd_formulas')
        self.assertEqual(document['config']['n_atoms'], 10)
        self.assertEqual(document['units'], {'delta_phi': 'rad'})
        rows = document['rows']
        self.assertEqual(list(rows[0]), ['xi', 'delta_phi', 'ok', 'note'])
        self.assertEqual(rows[0]['xi'], 1.0)
        self.assertEqual(rows[1]['delta_phi'], 'inf')

    def test_unknown_column(self):
        """Rows may only fill declared columns"""
        with self.assertRaises(KeyError):
            self.table.add(eta=0.5)

    def test_digest(self):
        """digest is the SHA-256 of the UTF-8 text"""
        self.assertEqual(digest(''), 'e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855')


class ExperimentRunAPITestCase(APITestCase):
    """Tests for the recorded-run endpoints"""

    def setUp(self):
        self.formulas = ExperimentRun.objects.create(
            command='qnd_formulas', config={'n_atoms': 100}, output_sha256='a' * 64, row_count=1,
        )
        self.disorder = ExperimentRun.objects.create(
            command='qnd_disorder', config={'n_atoms': 1000}, output_format='json',
            output_sha256='b' * 64, row_count=4,
        )

    def test_list_runs(self):
        """Runs are listed newest first"""
        response = self.client.get('/api/experiments/runs/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual([run['id'] for run in response.data], [self.disorder.id, self.formulas.id])

    def test_filter_by_command(self):
        """?command= restricts the list"""
        response = self.client.get('/api/experiments/runs/', {'command': 'qnd_formulas'})
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(len(response.data), 1)
        self.assertEqual(response.data[0]['command_display'], 'Closed-form phase errors')

    def test_list_is_unpaged(self):
        """Every run comes back in one plain list"""
        ExperimentRun.objects.bulk_create(
            ExperimentRun(command='qnd_simulate', config={}, output_sha256='c' * 64, row_count=1)
            for _ in range(25)
        )
        response = self.client.get('/api/experiments/runs/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertIsInstance(response.data, list)
        self.assertEqual(len(response.data), 27)

    def test_run_detail(self):
        """A single run with its config echo"""
        response = self.client.get(f'/api/experiments/runs/{self.disorder.id}/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['config'], {'n_atoms': 1000})
        self.assertEqual(response.data['row_count'], 4)

    def test_missing_run(self):
        """Unknown ids are 404"""
        response = self.client.get('/api/experiments/runs/9999/')
        self.assertEqual(response.status_code, status.HTTP_404_NOT_FOUND)

    def test_read_only(self):
        """The endpoints do not accept writes"""
        response = self.client.post('/api/experiments/runs/', {'command': 'qnd_formulas'}, format='json')
        self.assertEqual(response.status_code, status.HTTP_405_METHOD_NOT_ALLOWED)
