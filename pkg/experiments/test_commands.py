"""
Tests for the qnd_* management commands
"""
import json
import math
import os
import tempfile
from io import StringIO

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from .models import ExperimentRun
from .services.tables import digest, parse_csv

SQRT_E = math.sqrt(math.e)


def run(command, **options):
    out = StringIO()
    call_command(command, stdout=out, **options)
    return out.getvalue()


def rows(command, **options):
    return parse_csv(run(command, **options))


class FormulasCommandTestCase(SimpleTestCase):
    """Tests for qnd_formulas"""

    def test_symmetric_minima(self):
        """At xi=1, dg2=0, N=100 the phase errors are sqrt(e)/N and sqrt(2e)/N"""
        unmatched = rows('qnd_formulas', protocol='unmatched', xi=1.0, dg2=0.0, n_atoms=100)
        matched = rows('qnd_formulas', protocol='matched', xi=1.0, dg2=0.0, n_atoms=100)
        self.assertEqual(len(unmatched), 1)
        self.assertAlmostEqual(float(unmatched[0]['delta_phi']), 0.0164872, places=7)
        self.assertAlmostEqual(float(matched[0]['delta_phi']), 0.0233164, places=7)
        self.assertAlmostEqual(float(unmatched[0]['eta']), SQRT_E / 10, places=9)
        self.assertEqual(matched[0]['protocol'], 'matched')
        self.assertEqual(matched[0]['extrapolated'], 'false')

    def test_metadata_lines(self):
        """The output starts with the config echo and the units line"""
        lines = run('qnd_formulas', xi=1.0, n_atoms=10).splitlines()
        self.assertTrue(lines[0].startswith('# qnd_formulas {'))
        self.assertTrue(lines[1].startswith('# units: '))
        self.assertIn('delta_phi=rad', lines[1])
        self.assertTrue(lines[2].startswith('xi,dg2,n_atoms,protocol,delta_phi,eta,'))

    def test_grid(self):
        """A product grid gives one row per point, optimum at xi=1 without disorder"""
        table = rows('qnd_formulas', protocol='unmatched', n_atoms=100, grid=['xi=0.5:1.5:3', 'dg2=0:0.01:2'])
        self.assertEqual(len(table), 6)
        clean = [row for row in table if float(row['dg2']) == 0.0]
        best = min(clean, key=lambda row: float(row['delta_phi']))
        self.assertEqual(float(best['xi']), 1.0)

    def test_regime_flags(self):
        """Photon-number margins are blank without n_photons"""
        row = rows('qnd_formulas', xi=1.0, dg2=0.5, n_atoms=100)[0]
        self.assertEqual(row['small_kick_ok'], '')
        self.assertEqual(row['inhomogeneity_criterion_ok'], 'false')
        self.assertIn('exponent-sign-erratum', row['notes'])

        with_photons = rows('qnd_formulas', xi=1.0, dg2=0.0, n_atoms=10, n_photons=10 ** 6)[0]
        self.assertEqual(with_photons['photon_dominance_ok'], 'true')

    def test_empty_grid(self):
        """An empty grid exits with the usage code"""
        with self.assertLogs('experiments', level='ERROR'):
            with self.assertRaises(CommandError) as ctx:
                run('qnd_formulas', grid=['xi=1:2:0'])
        self.assertEqual(ctx.exception.returncode, 2)

    def test_grid_over_unsupported_parameter(self):
        """qnd_formulas cannot grid over phi"""
        with self.assertLogs('experiments', level='ERROR'):
            with self.assertRaises(CommandError) as ctx:
                run('qnd_formulas', grid=['phi=0:1:3'])
        self.assertEqual(ctx.exception.returncode, 2)

    def test_zero_xi_diverges(self):
        """xi = 0 is a degenerate protocol"""
        with self.assertLogs('experiments', level='ERROR'):
            with self.assertRaises(CommandError) as ctx:
                run('qnd_formulas', xi=0.0)
        self.assertEqual(ctx.exception.returncode, 4)

    def test_json_output(self):
        """--json emits the config echo, the units and the rows"""
        document = json.loads(run('qnd_formulas', protocol='stored', xi=1.0, n_atoms=100, json=True))
        self.assertEqual(document['command'], 'qnd_formulas')
        self.assertEqual(document['config']['protocol'], 'stored')
        self.assertEqual(document['units']['delta_phi'], 'rad')
        data = document['rows']
        self.assertEqual(len(data), 1)
        self.assertAlmostEqual(data[0]['delta_phi'], SQRT_E / 100, places=12)
        self.assertIs(data[0]['extrapolated'], False)

    def test_out_file(self):
        """--out writes the table to a file and reports on stdout"""
        handle, path = tempfile.mkstemp(suffix='.csv')
        os.close(handle)
        try:
            message = run('qnd_formulas', xi=1.0, out=path)
            self.assertIn('Wrote 1 rows', message)
            with open(path) as f:
                text = f.read()
            self.assertTrue(text.startswith('# qnd_formulas '))
            self.assertEqual(len(parse_csv(text)), 1)
        finally:
            os.unlink(path)

    def test_config_file(self):
        """Values come from the config file and flags override them"""
        handle, path = tempfile.mkstemp(suffix='.conf')
        with os.fdopen(handle, 'w') as f:
            f.write("ensemble.n_atoms = 10\nprotocol.name = unmatched\ngrid.xi = 0.5:2:4\n")
        try:
            table = rows('qnd_formulas', config=path)
            self.assertEqual(len(table), 4)
            self.assertEqual({row['n_atoms'] for row in table}, {'10'})
            overridden = rows('qnd_formulas', config=path, n_atoms=1000)
            self.assertEqual({row['n_atoms'] for row in overridden}, {'1000'})
        finally:
            os.unlink(path)


class SimulateCommandTestCase(SimpleTestCase):
    """Tests for qnd_simulate"""

    def test_matched_desk_scale(self):
        """N=3, n=400, xi=1: simulation matches the oracle and is within 6% of sqrt(2e)/3"""
        row = rows('qnd_simulate', protocol='matched', xi=1.0)[0]
        self.assertEqual((row['n_atoms'], row['n_photons']), ('3', '400'))
        self.assertLess(float(row['dev_sim_oracle']), 1e-9)
        self.assertLess(float(row['dev_sim_formula']), 0.06)
        self.assertAlmostEqual(float(row['delta_phi_formula']), math.sqrt(2 * math.e) / 3, places=7)
        self.assertEqual(float(row['dg2']), 0.0)
        self.assertEqual(float(row['mean_weight']), 1.0)

    def test_stored_improvement(self):
        """Stored over matched is 1/sqrt(2) within 2%"""
        matched = float(rows('qnd_simulate', protocol='matched', xi=1.0)[0]['delta_phi_sim'])
        stored = float(rows('qnd_simulate', protocol='stored', xi=1.0)[0]['delta_phi_sim'])
        self.assertAlmostEqual(stored / matched, 0.7071, delta=0.02 * 0.7071)

    def test_grid_seeds(self):
        """Grid point i draws its weights with seed XOR i"""
        table = rows('qnd_simulate', protocol='stored', n_atoms=2, n_photons=16, dg2=0.1, seed=4,
                     grid=['xi=0.5:1:2'])
        self.assertEqual([row['seed'] for row in table], ['4', '5'])
        self.assertTrue(all(float(row['mean_weight']) != 1.0 for row in table))
        self.assertTrue(all(float(row['dev_sim_oracle']) < 1e-9 for row in table))

    def test_zero_interaction_unmatched(self):
        """chi = 0 leaves the unmatched observable undefined"""
        with self.assertLogs('experiments', level='ERROR'):
            with self.assertRaises(CommandError) as ctx:
                run('qnd_simulate', protocol='unmatched', chi=0.0)
        self.assertEqual(ctx.exception.returncode, 4)

    def test_capacity(self):
        """States over the amplitude cap exit with the capacity code"""
        with self.assertLogs('experiments', level='ERROR'):
            with self.assertRaises(CommandError) as ctx:
                run('qnd_simulate', protocol='matched', cap=1000)
        self.assertEqual(ctx.exception.returncode, 3)
        self.assertIn('8 x 401 x 401', str(ctx.exception))


class SqueezingCommandTestCase(SimpleTestCase):
    """Tests for qnd_squeezing"""

    def test_entanglement_without_squeezing(self):
        """Stored protocol at N=4, n=1024: no stage is squeezed yet eta < 1"""
        table = rows('qnd_squeezing', xi=1.0)
        self.assertEqual(table[0]['stage'], 'initial')
        self.assertGreater(len(table), 2)
        for row in table:
            self.assertGreaterEqual(float(row['xi_ku2']), 1 - 1e-9, row['stage'])
            self.assertGreaterEqual(float(row['xi_w2']), 1 - 1e-9, row['stage'])
            self.assertLess(float(row['eta']), 1.0)
        purity = {row['stage']: float(row['purity']) for row in table}
        self.assertLess(purity['qnd'], 1.0 - 1e-6)
        self.assertAlmostEqual(purity['qnd_reversed'], 1.0, places=9)

    def test_zero_interaction(self):
        """chi = 0 leaves a coherent state at every stage and no phase estimate"""
        table = rows('qnd_squeezing', chi=0.0)
        for row in table:
            self.assertAlmostEqual(float(row['xi_ku2']), 1.0, places=12)
            self.assertAlmostEqual(float(row['xi_w2']), 1.0, places=12)
            self.assertEqual(row['delta_phi'], 'inf')

    def test_capacity(self):
        """Atom numbers beyond the simulator cap exit with the capacity code"""
        with self.assertLogs('experiments', level='ERROR'):
            with self.assertRaises(CommandError) as ctx:
                run('qnd_squeezing', n_atoms=15, n_photons=4)
        self.assertEqual(ctx.exception.returncode, 3)


class DisorderCommandTestCase(SimpleTestCase):
    """Tests for qnd_disorder"""

    def test_no_disorder(self):
        """Uniform weights give a zero standard error at every grid point"""
        table = rows('qnd_disorder', evaluator='formula', n_atoms=10, samples=3, grid=['xi=0.5:2:4'])
        self.assertEqual(len(table), 4)
        self.assertTrue(all(float(row['std_error']) == 0.0 for row in table))
        self.assertEqual({row['quantity'] for row in table}, {'delta_phi_formula'})

    def test_matched_unmatched_crossover(self):
        """At N=1000, xi=1 unmatched exceeds twice matched from some dg2 <= 0.01"""
        common = dict(evaluator='formula', n_atoms=1000, xi=1.0, samples=50, seed=3, grid=['dg2=0.004:0.01:4'])
        unmatched = rows('qnd_disorder', protocol='unmatched', **common)
        matched = rows('qnd_disorder', protocol='matched', **common)
        ratios = [float(u['mean']) / float(m['mean']) for u, m in zip(unmatched, matched)]
        self.assertLess(ratios[0], 2.0)
        crossing = [float(row['dg2']) for row, ratio in zip(unmatched, ratios) if ratio > 2.0]
        self.assertTrue(crossing)
        self.assertLessEqual(min(crossing), 0.01)

    def test_rerun_is_identical(self):
        """A fixed seed reproduces the output byte for byte"""
        options = dict(evaluator='oracle', protocol='matched', n_atoms=5, n_photons=64, dg2=0.1,
                       samples=20, seed=11, grid=['xi=0.5:1:2'])
        self.assertEqual(run('qnd_disorder', **options), run('qnd_disorder', **options))

    def test_scalar_quantity(self):
        """Scalar quantities report no moments"""
        row = rows('qnd_disorder', quantity='empirical_dg2', n_atoms=200, dg2=0.1, samples=40, seed=2)[0]
        self.assertAlmostEqual(float(row['mean']), 0.1, delta=0.02)
        self.assertEqual(row['mean_variance'], '')
        self.assertEqual(row['n_samples'], '40')

    def test_capacity_rows(self):
        """Grid points over the simulator cap are reported in the error column"""
        with self.assertLogs('disorder', level='WARNING'):
            table = rows('qnd_disorder', evaluator='simulation', protocol='stored', n_photons=4, chi=0.3,
                         dg2=0.1, samples=2, grid=['n_atoms=2:15:2'])
        self.assertEqual(table[0]['error'], '')
        self.assertIn('MAX_ATOMS', table[1]['error'])
        self.assertEqual(table[1]['mean'], '')

    def test_unknown_quantity(self):
        """Unknown quantities exit with the usage code"""
        with self.assertLogs('experiments', level='ERROR'):
            with self.assertRaises(CommandError) as ctx:
                run('qnd_disorder', quantity='fidelity', samples=2)
        self.assertEqual(ctx.exception.returncode, 2)


class RecordedRunTestCase(TestCase):
    """Tests for --record"""

    def test_record(self):
        """--record stores the config and the digest of the output"""
        text = run('qnd_formulas', xi=1.0, n_atoms=10, record=True, grid=['dg2=0:0.1:3'])
        run_ = ExperimentRun.objects.get()
        self.assertEqual(run_.command, 'qnd_formulas')
        self.assertEqual(run_.row_count, 3)
        self.assertEqual(run_.output_format, 'csv')
        self.assertEqual(run_.output_sha256, digest(text))
        self.assertEqual(run_.config['grid'], ['dg2=0:0.1:3'])

    def test_failed_run_not_recorded(self):
        """Runs that exit with an error leave no record"""
        with self.assertLogs('experiments', level='ERROR'):
            with self.assertRaises(CommandError):
                run('qnd_formulas', xi=0.0, record=True)
        self.assertFalse(ExperimentRun.objects.exists())
