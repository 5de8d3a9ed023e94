"""
Tests for the shared domain types, coupling weights, regime checks and Dicke helpers.
"""
import math

import numpy as np
from django.test import SimpleTestCase

from .domain import CouplingDistribution, CouplingKind, EnsembleConfig, Protocol, ProtocolParams
from .exceptions import ParameterError
from .services.dicke import apply_bands, collective_bands, compose_bands, css_amplitudes
from .services.regime import check_regime, formula_regime
from .services.weights import empirical_disorder, make_weights, population_moments


class MakeWeightsTestCase(SimpleTestCase):
    """Tests for coupling-weight generation"""

    def test_uniform_unit(self):
        """Uniform couplings are all ones"""
        weights = make_weights(CouplingDistribution(CouplingKind.UNIFORM_UNIT), 5)
        np.testing.assert_array_equal(weights, np.ones(5))

    def test_gaussian_moments(self):
        """Gaussian draws have mean 1 and the requested variance"""
        weights = make_weights(CouplingDistribution('gaussian', variance=0.04, seed=7), 10 ** 4)
        self.assertLess(abs(np.mean(weights) - 1.0), 0.01)
        self.assertLess(abs(np.var(weights) - 0.04), 0.005)

    def test_standing_wave_moments(self):
        """Intensity profile 2cos^2(theta) has mean 1 and variance 1/2"""
        weights = make_weights(CouplingDistribution('standing-wave', seed=1), 10 ** 5)
        self.assertLess(abs(np.mean(weights) - 1.0), 0.02)
        self.assertLess(abs(np.var(weights) - 0.5), 0.02)
        self.assertTrue(np.all(weights >= 0.0))

    def test_standing_wave_amplitude_moments(self):
        """Amplitude profile (pi/2)|cos(theta)| has mean 1 and variance pi^2/8 - 1"""
        weights = make_weights(CouplingDistribution('standing-wave-amplitude', seed=2), 10 ** 5)
        mean, variance = population_moments('standing-wave-amplitude')
        self.assertLess(abs(np.mean(weights) - mean), 0.02)
        self.assertLess(abs(np.var(weights) - variance), 0.01)
        self.assertAlmostEqual(variance, math.pi ** 2 / 8 - 1, places=14)

    def test_deterministic_under_seed(self):
        """Same (kind, variance, seed, N) gives identical draws"""
        dist = CouplingDistribution('gaussian', variance=0.3, seed=12345)
        np.testing.assert_array_equal(make_weights(dist, 50), make_weights(dist, 50))
        self.assertFalse(np.array_equal(make_weights(dist, 50), make_weights(dist.with_seed(12346), 50)))

    def test_negative_variance_rejected(self):
        """Negative variance is a parameter error"""
        with self.assertRaises(ParameterError):
            CouplingDistribution('gaussian', variance=-0.1)

    def test_invalid_atom_count(self):
        """N must be at least one"""
        with self.assertRaises(ParameterError):
            make_weights(CouplingDistribution(), 0)

    def test_seed_range(self):
        """Seeds are unsigned 64-bit integers"""
        CouplingDistribution(seed=2 ** 64 - 1)
        with self.assertRaises(ParameterError):
            CouplingDistribution(seed=-1)
        with self.assertRaises(ParameterError):
            CouplingDistribution(seed=2 ** 64)


class EmpiricalDisorderTestCase(SimpleTestCase):
    """Tests for empirical mean and variance"""

    def test_uniform(self):
        """Uniform weights give exactly (1, 0)"""
        self.assertEqual(empirical_disorder([1.0, 1.0, 1.0]), (1.0, 0.0))

    def test_hand_arithmetic(self):
        """[0.5, 1.5] has mean 1 and population variance 1/4"""
        mean, variance = empirical_disorder([0.5, 1.5])
        self.assertAlmostEqual(mean, 1.0, places=15)
        self.assertAlmostEqual(variance, 0.25, places=15)

    def test_large_gaussian(self):
        """A million gaussian draws reproduce the population variance"""
        weights = make_weights(CouplingDistribution('gaussian', variance=0.25, seed=3), 10 ** 6)
        _, variance = empirical_disorder(weights)
        self.assertLess(abs(variance - 0.25), 0.0015)

    def test_empty(self):
        """Empty weight vectors are rejected"""
        with self.assertRaises(ParameterError):
            empirical_disorder([])


class DomainTypesTestCase(SimpleTestCase):
    """Tests for EnsembleConfig and ProtocolParams"""

    def test_xi_recomputed(self):
        """xi = n chi^2 / 4 exactly"""
        params = ProtocolParams.from_xi(1.0, 4096)
        self.assertEqual(params.chi, 1.0 / 32.0)
        self.assertEqual(params.xi(4096), 1.0)
        params = ProtocolParams(chi=0.137)
        self.assertEqual(params.xi(333), 333 * 0.137 * 0.137 / 4.0)

    def test_weights_are_read_only(self):
        """Weight arrays cannot be mutated after construction"""
        cfg = EnsembleConfig.uniform(3, 10)
        with self.assertRaises(ValueError):
            cfg.weights[0] = 2.0

    def test_invalid_config(self):
        """Wrong weight length, non-finite weights and empty ensembles are rejected"""
        with self.assertRaises(ParameterError):
            EnsembleConfig(n_atoms=3, n_photons=10, weights=[1.0, 1.0])
        with self.assertRaises(ParameterError):
            EnsembleConfig(n_atoms=2, n_photons=10, weights=[1.0, math.inf])
        with self.assertRaises(ParameterError):
            EnsembleConfig(n_atoms=1, n_photons=0, weights=[1.0])

    def test_build_draws_weights(self):
        """build() uses make_weights for the distribution"""
        dist = CouplingDistribution('gaussian', variance=0.1, seed=9)
        cfg = EnsembleConfig.build(4, 100, dist)
        np.testing.assert_array_equal(cfg.weights, make_weights(dist, 4))

    def test_weight_statistics(self):
        """mean_weight and weight_variance are the empirical mean and (dg)^2"""
        cfg = EnsembleConfig(n_atoms=2, n_photons=10, weights=[0.5, 1.5])
        self.assertEqual(cfg.mean_weight, 1.0)
        self.assertEqual(cfg.weight_variance, 0.25)
        self.assertEqual(EnsembleConfig.uniform(5, 10).weight_variance, 0.0)

    def test_protocol_metadata(self):
        """Pulse count and signal label per protocol"""
        self.assertEqual(Protocol.MATCHED.pulses, 2)
        self.assertEqual(Protocol.STORED.pulses, 1)
        self.assertEqual(Protocol('unmatched').signal_label, 'Fp_z')


class RegimeTestCase(SimpleTestCase):
    """Tests for the regime-validity report"""

    def test_desk_scale_point(self):
        """N=4, n=4096, xi=1 satisfies photon dominance and small bend"""
        cfg = EnsembleConfig.uniform(4, 4096)
        report = check_regime(cfg, ProtocolParams.from_xi(1.0, 4096))
        self.assertAlmostEqual(report.photon_dominance, 4 / 64)
        self.assertTrue(report.satisfied('photon_dominance'))
        self.assertAlmostEqual(report.small_bend, 4 / 1024)
        self.assertTrue(report.satisfied('small_bend'))
        self.assertAlmostEqual(report.small_kick, 1 / 32)

    def test_photon_dominance_violated(self):
        """N=100, n=100 fails sqrt(n) >> N"""
        cfg = EnsembleConfig.uniform(100, 100)
        report = check_regime(cfg, ProtocolParams.from_xi(1.0, 100))
        self.assertFalse(report.satisfied('photon_dominance'))
        self.assertFalse(report.all_satisfied)

    def test_zero_interaction(self):
        """chi = 0 satisfies every margin and adds a note"""
        report = check_regime(EnsembleConfig.uniform(3, 50), ProtocolParams(chi=0.0))
        self.assertTrue(report.all_satisfied)
        self.assertEqual(len(report.notes), 1)

    def test_disorder_margins(self):
        """Disorder margins use the empirical variance of the weights"""
        cfg = EnsembleConfig(n_atoms=2, n_photons=400, weights=[0.5, 1.5])
        report = check_regime(cfg, ProtocolParams.from_xi(1.0, 400))
        self.assertAlmostEqual(report.small_disorder_xi, 0.25)
        self.assertAlmostEqual(report.inhomogeneity_criterion, 0.5)

    def test_formula_regime_without_photons(self):
        """Only disorder margins are known without n"""
        report = formula_regime(1.0, 0.01, 100)
        self.assertIsNone(report.small_kick)
        self.assertIsNone(report.satisfied('small_bend'))
        data = report.to_dict()
        self.assertIn('inhomogeneity_criterion_ok', data)
        self.assertFalse(data['inhomogeneity_criterion_ok'])
        self.assertFalse(data['extrapolated'])
        self.assertTrue(formula_regime(2.0, 0.5, 100).extrapolated)

    def test_threshold_override(self):
        """A stricter threshold flips a borderline margin"""
        cfg = EnsembleConfig.uniform(4, 4096)
        report = check_regime(cfg, ProtocolParams.from_xi(1.0, 4096), threshold=0.01)
        self.assertFalse(report.satisfied('photon_dominance'))


class DickeTestCase(SimpleTestCase):
    """Tests for Dicke-ladder helpers"""

    def expectation(self, bands, amplitudes):
        return complex(np.vdot(amplitudes, apply_bands(bands, amplitudes, 0)))

    def test_small_css_amplitudes(self):
        """n=2 amplitudes are (1/2, 1/sqrt(2), 1/2)"""
        np.testing.assert_allclose(css_amplitudes(2), [0.5, 1 / math.sqrt(2), 0.5], atol=1e-15)

    def test_large_css_normalised(self):
        """Log-space amplitudes stay normalised for n = 5000"""
        amplitudes = css_amplitudes(5000)
        self.assertAlmostEqual(float(np.sum(amplitudes ** 2)), 1.0, places=12)

    def test_css_moments(self):
        """<S_x> = n/2, <S_y> = 0, <S_y^2> = n/4 on the x-polarised state"""
        n = 50
        amplitudes = css_amplitudes(n).astype(complex)
        sx, sy = collective_bands(n, 'x'), collective_bands(n, 'y')
        self.assertAlmostEqual(self.expectation(sx, amplitudes).real, n / 2, places=10)
        self.assertAlmostEqual(abs(self.expectation(sy, amplitudes)), 0.0, places=10)
        self.assertAlmostEqual(self.expectation(compose_bands(sy, sy), amplitudes).real, n / 4, places=10)

    def test_commutator(self):
        """[S_x, S_y] = i S_z on the ladder"""
        n = 6
        sx, sy, sz = (collective_bands(n, axis) for axis in 'xyz')
        basis = np.eye(n + 1, dtype=complex)

        def matrix(bands):
            return np.column_stack([apply_bands(bands, basis[:, q], 0) for q in range(n + 1)])

        commutator = matrix(compose_bands(sx, sy)) - matrix(compose_bands(sy, sx))
        np.testing.assert_allclose(commutator, 1j * matrix(sz), atol=1e-12)
