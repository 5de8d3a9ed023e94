"""
Tests for the moment oracle: characteristic functions, closed forms,
the photon-conditioned path and phase errors.
"""
import math

import numpy as np
from django.test import SimpleTestCase

from ensembles.domain import CouplingDistribution, EnsembleConfig, Protocol, ProtocolParams
from ensembles.exceptions import DegenerateProtocolError, DescriptorError, ParameterError
from .services.characteristic import css_char, leave_one_out_products, product
from .services.derivatives import central_slope
from .services.moment_oracle import (
    _closed_form_moments,
    _conditioned_moments,
    analytic_slope,
    exact_delta_phi,
    exact_moments,
    signal_mean,
)


def random_config(n_atoms, n_photons, seed):
    return EnsembleConfig.build(n_atoms, n_photons, CouplingDistribution('gaussian', variance=0.2, seed=seed))


class CharacteristicTestCase(SimpleTestCase):
    """Tests for css_char and sign-tracked products"""

    def test_reference_values(self):
        """cos^m(theta/2) at reference points"""
        self.assertEqual(css_char(0.0, 5), 1.0)
        self.assertAlmostEqual(css_char(math.pi, 1), 0.0, places=15)
        self.assertAlmostEqual(css_char(0.2, 100), 0.6060439, places=7)

    def test_matches_binomial_sum(self):
        """Brute-force sum over the binomial distribution of sum s_z"""
        m, theta = 100, 0.2
        k = np.arange(m + 1)
        weights = np.array([math.comb(m, int(j)) for j in k], dtype=float) / 2.0 ** m
        brute = float(np.sum(weights * np.cos(theta * (k - m / 2))))
        self.assertAlmostEqual(css_char(theta, m), brute, places=12)

    def test_log_space_branch(self):
        """Large spin counts agree with direct powers and keep the sign"""
        self.assertAlmostEqual(css_char(0.01, 5000) / math.cos(0.005) ** 5000, 1.0, places=12)
        self.assertLess(css_char(2 * math.pi - 0.01, 5001), 0.0)
        self.assertGreater(css_char(2 * math.pi - 0.01, 5000), 0.0)

    def test_leave_one_out(self):
        """Leave-one-out products with negatives and exact zeros"""
        np.testing.assert_allclose(leave_one_out_products([2.0, -3.0, 0.5]), [-1.5, 1.0, -6.0])
        np.testing.assert_allclose(leave_one_out_products([2.0, 0.0, 4.0]), [0.0, 8.0, 0.0], atol=1e-14)
        np.testing.assert_array_equal(leave_one_out_products([0.0, 0.0, 4.0]), [0.0, 0.0, 0.0])
        self.assertAlmostEqual(product([0.5, -2.0, 3.0]), -3.0, places=14)

    def test_underflow_safe(self):
        """A million factors close to one are multiplied without trouble"""
        values = np.full(10 ** 6, math.cos(1e-3))
        self.assertAlmostEqual(product(values), math.exp(10 ** 6 * math.log(math.cos(1e-3))), places=12)


class CentralSlopeTestCase(SimpleTestCase):
    """Tests for the Richardson-extrapolated central difference"""

    def test_sine(self):
        """d sin(x)/dx at 0 is 1"""
        slope, gap = central_slope(math.sin, 1e-3)
        self.assertAlmostEqual(slope, 1.0, places=11)
        self.assertLess(gap, 1e-6)

    def test_invalid_step(self):
        """Non-positive steps are rejected"""
        with self.assertRaises(ParameterError):
            central_slope(math.sin, 0.0)


class ClosedFormMomentsTestCase(SimpleTestCase):
    """Tests for the phi = 0 moments"""

    def test_uncoupled(self):
        """chi = 0 leaves the coherent-state moments"""
        cfg = random_config(5, 30, seed=1)
        for protocol in Protocol:
            moments = exact_moments(cfg, ProtocolParams(chi=0.0, protocol=protocol))
            np.testing.assert_allclose(moments.means, 0.0, atol=1e-15)
            self.assertAlmostEqual(moments.variance('F_z'), 5 / 4)
            self.assertAlmostEqual(moments.variance('S_y'), 30 / 4)

    def test_matched_variance_identity(self):
        """Var(A) = (n/2)(1 + prod cos(chi g_k))/2"""
        cfg = EnsembleConfig(n_atoms=2, n_photons=4, weights=[0.5, 1.5])
        moments = exact_moments(cfg, ProtocolParams(chi=0.2, protocol='matched'))
        self.assertAlmostEqual(moments.variance('A'), 1.9505627, places=7)
        expected = 2.0 * (1.0 + math.cos(0.1) * math.cos(0.3)) / 2.0
        self.assertAlmostEqual(moments.variance('A'), expected, places=12)

    def test_single_atom_covariance(self):
        """N=1, n=1: Cov(F_z, S_y) = (1/2)(1/2) sin(chi/2)"""
        cfg = EnsembleConfig.uniform(1, 1)
        moments = exact_moments(cfg, ProtocolParams(chi=0.3, protocol='unmatched'))
        self.assertAlmostEqual(moments.mean('S_y'), 0.0, places=15)
        self.assertAlmostEqual(moments.cov('F_z', 'S_y'), 0.0373589, places=7)

    def test_f_z_conserved(self):
        """Mean and variance of F_z do not depend on chi at phi = 0"""
        cfg = random_config(6, 50, seed=4)
        for chi in (0.0, 0.1, 0.7, 2.0):
            moments = exact_moments(cfg, ProtocolParams(chi=chi, protocol='matched'))
            self.assertEqual(moments.mean('F_z'), 0.0)
            self.assertAlmostEqual(moments.variance('F_z'), 6 / 4, places=14)

    def test_stored_halving(self):
        """Var(B)/Var(A) -> 1/2 for small N chi^2"""
        cfg = EnsembleConfig.uniform(3, 400)
        params = ProtocolParams.from_xi(0.01, 400)
        var_a = exact_moments(cfg, params.with_protocol('matched')).variance('A')
        var_b = exact_moments(cfg, params.with_protocol('stored')).variance('B')
        self.assertAlmostEqual(var_b / var_a, 0.5, delta=0.01)

    def test_unknown_label(self):
        """Asking for a label the protocol lacks raises a descriptor error"""
        moments = exact_moments(EnsembleConfig.uniform(2, 4), ProtocolParams(chi=0.1, protocol='stored'))
        with self.assertRaises(DescriptorError):
            moments.variance('J_y')

    def test_large_ensemble(self):
        """A million atoms are handled in O(N)"""
        cfg = EnsembleConfig.uniform(10 ** 6, 10 ** 12)
        moments = exact_moments(cfg, ProtocolParams.from_xi(1.0, 10 ** 12, protocol='matched'))
        self.assertTrue(math.isfinite(moments.variance('A')))
        self.assertGreater(moments.variance('A'), 0.0)


class ConditionedMomentsTestCase(SimpleTestCase):
    """Tests for the photon-conditioned path"""

    def test_agrees_with_closed_form_at_zero_phase(self):
        """Both paths give the same phi = 0 moments"""
        cfg = random_config(3, 10, seed=7)
        for protocol in Protocol:
            params = ProtocolParams(chi=0.6, protocol=protocol)
            closed = _closed_form_moments(cfg, params)
            conditioned = _conditioned_moments(cfg, params)
            self.assertEqual(closed.labels, conditioned.labels)
            np.testing.assert_allclose(conditioned.means, closed.means, atol=1e-12)
            np.testing.assert_allclose(conditioned.covariance, closed.covariance, atol=1e-11)

    def test_symmetric_limit_collapse(self):
        """With unit weights Ft_z and F_z moments coincide"""
        cfg = EnsembleConfig.uniform(3, 12)
        moments = exact_moments(cfg, ProtocolParams(chi=0.4, phi=0.05, protocol='matched'))
        self.assertAlmostEqual(moments.mean('Ft_z'), moments.mean('F_z'), places=13)
        self.assertAlmostEqual(moments.variance('Ft_z'), moments.variance('F_z'), places=13)
        self.assertAlmostEqual(moments.cov('Ft_z', 'S_y'), moments.cov('F_z', 'S_y'), places=13)
        self.assertAlmostEqual(moments.cov('Ft_z', 'J_y'), moments.cov('F_z', 'J_y'), places=13)

    def test_positive_semidefinite(self):
        """Covariance matrices are PSD for random weights and phases"""
        for seed in range(5):
            cfg = random_config(4, 16, seed=seed)
            for protocol in Protocol:
                moments = exact_moments(cfg, ProtocolParams(chi=0.5, phi=0.3, protocol=protocol))
                self.assertTrue(moments.is_psd(), (seed, protocol))

    def test_rotation_without_interaction(self):
        """<F_z> = -(N/2) sin(phi) on the coherent state"""
        cfg = EnsembleConfig.uniform(3, 5)
        moments = exact_moments(cfg, ProtocolParams(chi=0.0, phi=0.4, protocol='stored'))
        self.assertAlmostEqual(moments.mean('F_z'), -1.5 * math.sin(0.4), places=13)


class SlopeTestCase(SimpleTestCase):
    """Tests for analytic and finite-difference slopes"""

    def test_analytic_matches_richardson(self):
        """The analytic derivative agrees with finite differences of exact means"""
        for seed, protocol in enumerate(Protocol):
            cfg = random_config(3, 20, seed=seed + 10)
            params = ProtocolParams(chi=0.3, protocol=protocol)
            numeric, _ = central_slope(lambda phi: signal_mean(cfg, params.at_phi(phi)), 1e-4)
            np.testing.assert_allclose(analytic_slope(cfg, params), numeric, rtol=1e-7)

    def test_unmatched_chi_zero(self):
        """F'_z is undefined without interaction"""
        with self.assertRaises(DegenerateProtocolError):
            analytic_slope(EnsembleConfig.uniform(2, 4), ProtocolParams(chi=0.0, protocol='unmatched'))


class ExactDeltaPhiTestCase(SimpleTestCase):
    """Tests for the exact phase error"""

    def test_unmatched_desk_scale(self):
        """N=4, n=4096, xi=1 unmatched is within 5% of sqrt(e)/4"""
        cfg = EnsembleConfig.uniform(4, 4096)
        result = exact_delta_phi(cfg, ProtocolParams.from_xi(1.0, 4096, protocol='unmatched'))
        self.assertAlmostEqual(result.delta_phi / 0.412180, 1.0, delta=0.05)
        self.assertAlmostEqual(result.eta, 2.0 * result.delta_phi, places=14)

    def test_matched_desk_scale(self):
        """N=4, n=4096, xi=1 matched is within 5% of sqrt(2e)/4"""
        cfg = EnsembleConfig.uniform(4, 4096)
        result = exact_delta_phi(cfg, ProtocolParams.from_xi(1.0, 4096, protocol='matched'))
        self.assertAlmostEqual(result.delta_phi / 0.582911, 1.0, delta=0.05)

    def test_slope_modes_agree(self):
        """Richardson and analytic slopes give the same phase error"""
        cfg = random_config(4, 64, seed=21)
        for protocol in Protocol:
            params = ProtocolParams(chi=0.2, protocol=protocol)
            richardson = exact_delta_phi(cfg, params, slope='richardson').delta_phi
            analytic = exact_delta_phi(cfg, params, slope='analytic').delta_phi
            np.testing.assert_allclose(richardson, analytic, rtol=1e-7)

    def test_auto_switches_to_analytic(self):
        """Large ensembles use the analytic slope and approach sqrt(2e)/N"""
        cfg = EnsembleConfig.uniform(1000, 10 ** 8)
        params = ProtocolParams.from_xi(1.0, 10 ** 8, protocol='matched')
        with self.assertLogs('oracle.services.moment_oracle', level='DEBUG') as logs:
            result = exact_delta_phi(cfg, params)
        self.assertTrue(any('analytic' in line for line in logs.output))
        self.assertAlmostEqual(1000 * result.delta_phi / math.sqrt(2 * math.e), 1.0, delta=1e-3)

    def test_zero_interaction(self):
        """chi = 0 is a degenerate protocol"""
        for protocol in Protocol:
            with self.assertRaises(DegenerateProtocolError):
                exact_delta_phi(EnsembleConfig.uniform(2, 10), ProtocolParams(chi=0.0, protocol=protocol))

    def test_invalid_slope_mode(self):
        """Unknown slope modes are rejected"""
        with self.assertRaises(ParameterError):
            exact_delta_phi(EnsembleConfig.uniform(2, 10), ProtocolParams(chi=0.1), slope='spline')
