"""
Tests for Monte Carlo disorder averaging and parameter sweeps.
"""
import math

import numpy as np
from django.test import SimpleTestCase

from ensembles.domain import CouplingDistribution, EnsembleConfig, Protocol, ProtocolParams
from ensembles.exceptions import CapacityError, DegenerateProtocolError, DescriptorError, ParameterError
from ensembles.services.weights import make_weights
from formulas.services.phase_error import delta_phi, delta_phi_matched, signal_factor
from oracle.services.moment_oracle import exact_delta_phi
from .services.monte_carlo import apply_point, disorder_average, sweep
from .services.quantities import QUANTITIES, get_quantity


def gaussian(variance, seed):
    return CouplingDistribution('gaussian', variance=variance, seed=seed)


class DisorderAverageTestCase(SimpleTestCase):
    """Tests for disorder_average"""

    def test_uniform_weights(self):
        """Without disorder every sample is the fixed-weight value"""
        base = EnsembleConfig.uniform(3, 100)
        params = ProtocolParams.from_xi(1.0, 100, protocol='matched')
        stats = disorder_average('delta_phi_oracle', CouplingDistribution(), 5, base, params)
        self.assertEqual(stats.std_error, 0.0)
        expected = exact_delta_phi(base, params, slope='analytic').delta_phi
        self.assertAlmostEqual(stats.mean / expected, 1.0, places=12)
        self.assertEqual(len(stats.per_sample), 5)

        spread = disorder_average('empirical_dg2', CouplingDistribution(), 3, base, params)
        self.assertEqual(spread.mean, 0.0)
        self.assertEqual(spread.std_error, 0.0)

    def test_signal_factor(self):
        """Mean of exp(-xi g^2/2) over gaussian g matches the closed-form average"""
        base = EnsembleConfig.uniform(1, 1000)
        params = ProtocolParams.from_xi(0.5, 1000)
        stats = disorder_average('signal_factor', gaussian(0.1, seed=5), 20000, base, params)
        expected = signal_factor(0.5, 0.1)
        self.assertAlmostEqual(expected, math.exp(-0.25 / 1.05) / math.sqrt(1.05), places=14)
        self.assertGreater(stats.std_error, 0.0)
        self.assertLess(abs(stats.mean - expected), 4 * stats.std_error)

    def test_convergence(self):
        """Quadrupling the samples halves the standard error within 20%"""
        base = EnsembleConfig.uniform(1, 1000)
        params = ProtocolParams.from_xi(0.5, 1000)
        coarse = disorder_average('signal_factor', gaussian(0.1, seed=6), 5000, base, params)
        fine = disorder_average('signal_factor', gaussian(0.1, seed=6), 20000, base, params)
        self.assertAlmostEqual(coarse.std_error / fine.std_error, 2.0, delta=0.4)

    def test_moments_first(self):
        """The mean is formed from averaged moments, not averaged phase errors"""
        base = EnsembleConfig.uniform(4, 200)
        params = ProtocolParams.from_xi(1.0, 200, protocol='unmatched')
        stats = disorder_average('delta_phi_oracle', gaussian(0.3, seed=2), 10, base, params)
        self.assertAlmostEqual(stats.mean, math.sqrt(stats.mean_variance) / abs(stats.mean_slope), places=14)
        self.assertNotAlmostEqual(stats.mean, float(np.mean(stats.per_sample)), places=6)

    def test_matched_average(self):
        """Disorder-averaged matched phase error at N=6 is within 10% of the closed form"""
        base = EnsembleConfig.uniform(6, 10 ** 4)
        params = ProtocolParams.from_xi(1.0, 10 ** 4, protocol='matched')
        stats = disorder_average('delta_phi_oracle', gaussian(0.25, seed=21), 1000, base, params)
        expected = delta_phi_matched(1.0, 0.25, 6).delta_phi
        self.assertAlmostEqual(stats.mean / expected, 1.0, delta=0.1)

    def test_gaussian_agreement(self):
        """Large ensembles agree with the closed forms within 3 standard errors plus 5%"""
        n_photons = 10 ** 8
        base = EnsembleConfig.uniform(1000, n_photons)
        for protocol in (Protocol.UNMATCHED, Protocol.MATCHED):
            params = ProtocolParams.from_xi(1.0, n_photons, protocol=protocol)
            stats = disorder_average('delta_phi_oracle', gaussian(0.1, seed=17), 20, base, params)
            expected = delta_phi(protocol, 1.0, 0.1, 1000).delta_phi
            self.assertLess(abs(stats.mean - expected), 3 * stats.std_error + 0.05 * expected, protocol)

    def test_desk_scale_disorder(self):
        """N=3, n=400, dg2=0.25: each protocol within 15% of its closed form at the pooled dg2"""
        dist = gaussian(0.25, seed=11)
        n_samples = 100
        pooled = np.concatenate([make_weights(dist, 3, stream=(i,)) for i in range(n_samples)])
        dg2 = float(np.var(pooled))
        base = EnsembleConfig.uniform(3, 400)
        for protocol in (Protocol.UNMATCHED, Protocol.MATCHED):
            params = ProtocolParams.from_xi(1.0, 400, protocol=protocol)
            stats = disorder_average('delta_phi_oracle', dist, n_samples, base, params)
            expected = delta_phi(protocol, 1.0, dg2, 3).delta_phi
            self.assertAlmostEqual(stats.mean / expected, 1.0, delta=0.15, msg=protocol)

    def test_too_few_samples(self):
        """At least two samples are needed for a standard error"""
        with self.assertRaises(ParameterError):
            disorder_average('signal_factor', gaussian(0.1, 1), 1, EnsembleConfig.uniform(2, 10), ProtocolParams(chi=0.1))

    def test_unknown_quantity(self):
        """Unknown quantity names raise a descriptor error"""
        with self.assertRaises(DescriptorError):
            get_quantity('delta_phi_guess')
        self.assertTrue(get_quantity('delta_phi_formula').is_phase_error)
        self.assertFalse(QUANTITIES['signal_factor'].is_phase_error)

    def test_error_names_sample(self):
        """A failing evaluation carries the sample offset and seed"""
        base = EnsembleConfig.uniform(2, 10)
        with self.assertRaises(DegenerateProtocolError) as ctx:
            disorder_average('delta_phi_oracle', gaussian(0.1, 3), 4, base, ProtocolParams(chi=0.0))
        self.assertEqual(ctx.exception.sample_offset, 0)
        self.assertEqual(ctx.exception.sample_seed, 3)

    def test_capacity_propagates(self):
        """Simulation samples respect the amplitude cap"""
        base = EnsembleConfig.uniform(3, 50)
        with self.assertRaises(CapacityError):
            disorder_average('delta_phi_simulation', gaussian(0.1, 3), 2, base, ProtocolParams(chi=0.2), cap=100)

    def test_seed_determinism(self):
        """Identical seeds give bitwise-identical samples; other seeds do not"""
        base = EnsembleConfig.uniform(5, 64)
        params = ProtocolParams(chi=0.2, protocol='stored')
        first = disorder_average('delta_phi_oracle', gaussian(0.2, 99), 8, base, params)
        second = disorder_average('delta_phi_oracle', gaussian(0.2, 99), 8, base, params)
        other = disorder_average('delta_phi_oracle', gaussian(0.2, 100), 8, base, params)
        np.testing.assert_array_equal(first.per_sample, second.per_sample)
        self.assertFalse(np.array_equal(first.per_sample, other.per_sample))

    def test_workers_do_not_change_results(self):
        """Parallel evaluation reproduces the sequential samples"""
        base = EnsembleConfig.uniform(50, 10)
        params = ProtocolParams(chi=0.1)
        sequential = disorder_average('empirical_dg2', gaussian(0.3, 8), 12, base, params, workers=1)
        parallel = disorder_average('empirical_dg2', gaussian(0.3, 8), 12, base, params, workers=2)
        np.testing.assert_array_equal(sequential.per_sample, parallel.per_sample)

    def test_simulation_matches_oracle(self):
        """Simulated and oracle moments average to the same phase error"""
        base = EnsembleConfig.uniform(3, 20)
        params = ProtocolParams(chi=0.3, protocol='matched')
        simulated = disorder_average('delta_phi_simulation', gaussian(0.2, 4), 3, base, params)
        oracle = disorder_average('delta_phi_oracle', gaussian(0.2, 4), 3, base, params)
        np.testing.assert_allclose(simulated.per_sample, oracle.per_sample, rtol=1e-6)


class SweepTestCase(SimpleTestCase):
    """Tests for sweep and apply_point"""

    def setUp(self):
        self.base = EnsembleConfig.uniform(100, 10 ** 6)
        self.params = ProtocolParams.from_xi(1.0, 10 ** 6, protocol='unmatched')

    def test_single_point(self):
        """A one-point grid reduces to disorder_average"""
        dist = gaussian(0.05, seed=42)
        rows = sweep([{'xi': 1.0}], dist, 4, self.base, self.params, 'delta_phi_formula')
        direct = disorder_average('delta_phi_formula', dist, 4, self.base, self.params)
        self.assertEqual(len(rows), 1)
        self.assertEqual(rows[0].seed, 42)
        self.assertAlmostEqual(rows[0].stats.mean, direct.mean, places=14)

    def test_optimum_at_unit_xi(self):
        """Without disorder the unmatched phase error is smallest at xi = 1"""
        points = [{'xi': xi} for xi in (0.25, 0.5, 1.0, 2.0)]
        rows = sweep(points, gaussian(0.0, seed=1), 2, self.base, self.params, 'delta_phi_formula')
        means = [row.stats.mean for row in rows]
        self.assertEqual(int(np.argmin(means)), 2)
        self.assertTrue(all(row.stats.std_error == 0.0 for row in rows))

    def test_point_seeds(self):
        """Row i uses seed XOR i and reruns are identical"""
        dist = gaussian(0.1, seed=7)
        points = [{'dg2': 0.1}, {'dg2': 0.1}, {'dg2': 0.2}]
        rows = sweep(points, dist, 3, self.base, self.params, 'empirical_dg2')
        again = sweep(points, dist, 3, self.base, self.params, 'empirical_dg2')
        self.assertEqual([row.seed for row in rows], [7, 6, 5])
        for row, rerun in zip(rows, again):
            np.testing.assert_array_equal(row.stats.per_sample, rerun.stats.per_sample)
        direct = disorder_average('empirical_dg2', gaussian(0.1, seed=7 ^ 1), 3, self.base, self.params)
        np.testing.assert_array_equal(rows[1].stats.per_sample, direct.per_sample)

    def test_capacity_recorded(self):
        """A point over the simulator cap is recorded and the sweep goes on"""
        base = EnsembleConfig.uniform(2, 4)
        params = ProtocolParams(chi=0.3, protocol='matched')
        with self.assertLogs('disorder.services.monte_carlo', level='WARNING'):
            rows = sweep([{'n_atoms': 2}, {'n_atoms': 15}], gaussian(0.1, 3), 2, base, params, 'delta_phi_simulation')
        self.assertIsNotNone(rows[0].stats)
        self.assertIsNone(rows[1].stats)
        self.assertIn('MAX_ATOMS', rows[1].error)

    def test_invalid_grid(self):
        """Empty grids and unknown parameters are rejected"""
        with self.assertRaises(ParameterError):
            sweep([], gaussian(0.1, 1), 2, self.base, self.params, 'signal_factor')
        with self.assertRaises(ParameterError):
            apply_point({'temperature': 1.0}, gaussian(0.1, 1), self.base, self.params)

    def test_apply_point(self):
        """Grid values replace the base configuration"""
        dist, base, params = apply_point(
            {'n_photons': 400, 'xi': 2.0, 'dg2': 0.3, 'phi': 0.1}, gaussian(0.1, 1), self.base, self.params,
        )
        self.assertEqual(base.n_photons, 400)
        self.assertEqual(dist.variance, 0.3)
        self.assertAlmostEqual(params.xi(400), 2.0, places=14)
        self.assertEqual(params.phi, 0.1)
        self.assertEqual(params.protocol, Protocol.UNMATCHED)
