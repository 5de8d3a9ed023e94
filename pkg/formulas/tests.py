"""
Tests for the closed-form phase errors, the xi optimizer and the formula API.
"""
import math

import numpy as np
from django.test import SimpleTestCase
from scipy.integrate import quad
from rest_framework import status
from rest_framework.test import APITestCase

from ensembles.domain import Protocol
from ensembles.exceptions import DivergenceError, ParameterError
from .domain import EXPONENT_SIGN_ERRATUM
from .services.optimizer import optimal_xi
from .services.phase_error import (
    delta_phi,
    delta_phi_matched,
    delta_phi_stored,
    delta_phi_unmatched,
    is_extrapolated,
    mean_signal_unmatched,
    phase_error_value,
    signal_factor,
    signal_moments,
    variance_unmatched,
)


class MeanSignalTestCase(SimpleTestCase):
    """Tests for the unmatched mean signal"""

    def test_zero_rotation(self):
        """No rotation gives no signal"""
        self.assertEqual(mean_signal_unmatched(0.0, 1.0, 0.25, 100), 0.0)

    def test_symmetric_value(self):
        """Symmetric couplings give -(N phi / 2) exp(-xi/2)"""
        self.assertAlmostEqual(mean_signal_unmatched(0.01, 1.0, 0.0, 100), -0.5 * math.exp(-0.5), places=12)
        self.assertAlmostEqual(mean_signal_unmatched(0.01, 1.0, 0.0, 100), -0.3032653, places=7)

    def test_disordered_value(self):
        """Disorder shrinks the exponent and adds a 1/sqrt(1 + xi dg2) factor"""
        expected = -0.5 * math.exp(-0.4) / math.sqrt(1.25)
        self.assertAlmostEqual(mean_signal_unmatched(0.01, 1.0, 0.25, 100), expected, places=12)

    def test_extrapolation_is_logged(self):
        """Evaluations with xi*dg2 >= 1 still return a value and warn"""
        with self.assertLogs('formulas.services.phase_error', level='WARNING'):
            value = mean_signal_unmatched(0.01, 2.0, 1.0, 10)
        self.assertLess(value, 0.0)
        self.assertTrue(is_extrapolated(2.0, 1.0))
        self.assertFalse(is_extrapolated(1.0, 0.5))

    def test_extrapolation_flag(self):
        """with_regime returns the value with a report that flags xi*dg2 >= 1"""
        with self.assertLogs('formulas.services.phase_error', level='WARNING'):
            value, regime = mean_signal_unmatched(0.01, 2.0, 1.0, 10, with_regime=True)
        self.assertEqual(value, mean_signal_unmatched(0.01, 2.0, 1.0, 10))
        self.assertTrue(regime.extrapolated)

        _, regime = mean_signal_unmatched(0.01, 1.0, 0.25, 100, with_regime=True)
        self.assertFalse(regime.extrapolated)
        self.assertAlmostEqual(regime.small_disorder_xi, 0.25)

    def test_signal_factor_matches_gaussian_integral(self):
        """signal_factor equals the numerical Gaussian average of exp(-xi g^2 / 2)"""
        xi, dg2 = 0.5, 0.1
        sigma = math.sqrt(dg2)

        def integrand(g):
            density = math.exp(-(g - 1.0) ** 2 / (2 * dg2)) / math.sqrt(2 * math.pi * dg2)
            return density * math.exp(-xi * g ** 2 / 2)

        integral, _ = quad(integrand, 1.0 - 12 * sigma, 1.0 + 12 * sigma, epsabs=1e-13, epsrel=1e-12)
        self.assertAlmostEqual(signal_factor(xi, dg2), integral, places=10)
        self.assertAlmostEqual(signal_factor(xi, dg2), math.exp(-0.25 / 1.05) / math.sqrt(1.05), places=14)


class VarianceUnmatchedTestCase(SimpleTestCase):
    """Tests for the unmatched signal variance"""

    def test_symmetric_limit(self):
        """Var = 1/(4 xi) without disorder, for any N"""
        for n_atoms in (1, 10, 1000):
            total, _ = variance_unmatched(1.0, 0.0, n_atoms)
            self.assertAlmostEqual(total, 0.25, places=14)

    def test_direct_arithmetic(self):
        """(1 + N xi dg2)/(4 xi) at xi=2, dg2=0.1, N=50"""
        total, (shot, entanglement, inhomogeneity) = variance_unmatched(2.0, 0.1, 50)
        self.assertAlmostEqual(total, 1.375, places=12)
        self.assertAlmostEqual(shot, 12.5, places=12)
        self.assertAlmostEqual(entanglement, 0.125, places=12)
        self.assertAlmostEqual(inhomogeneity, 1.25, places=12)

    def test_criterion_boundary(self):
        """At dg2 = 1/N the inhomogeneity share equals the entanglement share"""
        n_atoms = 40
        total, (_, entanglement, inhomogeneity) = variance_unmatched(1.0, 1.0 / n_atoms, n_atoms)
        self.assertAlmostEqual(total, 0.5, places=12)
        self.assertAlmostEqual(inhomogeneity, entanglement, places=12)

    def test_zero_xi_diverges(self):
        """xi = 0 raises a divergence error"""
        with self.assertRaises(DivergenceError):
            variance_unmatched(0.0, 0.0, 10)


class PhaseErrorTestCase(SimpleTestCase):
    """Tests for the three closed-form phase errors"""

    def test_unmatched_values(self):
        """Unmatched phase error at reference points"""
        self.assertAlmostEqual(delta_phi_unmatched(1.0, 0.0, 100).delta_phi, 0.01648721, places=8)
        self.assertAlmostEqual(delta_phi_unmatched(0.5, 0.0, 1000).delta_phi, 0.00181589, places=8)
        self.assertAlmostEqual(delta_phi_unmatched(1.0, 0.01, 1000).delta_phi, 0.0054684, places=6)

    def test_matched_values(self):
        """Matched phase error at reference points"""
        self.assertAlmostEqual(delta_phi_matched(1.0, 0.0, 100).delta_phi, math.sqrt(2 * math.e) / 100, places=14)
        self.assertAlmostEqual(delta_phi_matched(1.0, 1.0, 100).delta_phi, 0.05136102, places=8)

    def test_stored_values(self):
        """Stored phase error is the matched one divided by sqrt(2)"""
        self.assertAlmostEqual(delta_phi_stored(1.0, 0.0, 100).delta_phi, math.sqrt(math.e) / 100, places=14)
        self.assertAlmostEqual(delta_phi_stored(1.0, 1.0, 100).delta_phi, 0.03631790, places=8)
        for xi, dg2, n_atoms in [(0.3, 0.0, 7), (2.0, 0.5, 100), (10.0, 3.0, 5)]:
            ratio = delta_phi_stored(xi, dg2, n_atoms).delta_phi / delta_phi_matched(xi, dg2, n_atoms).delta_phi
            self.assertAlmostEqual(ratio, 1.0 / math.sqrt(2.0), places=14)

    def test_erratum_note(self):
        """Matched and stored results carry the exponent-sign note"""
        self.assertIn(EXPONENT_SIGN_ERRATUM, delta_phi_matched(1.0, 0.0, 10).notes)
        self.assertIn(EXPONENT_SIGN_ERRATUM, delta_phi_stored(1.0, 0.0, 10).notes)
        self.assertNotIn(EXPONENT_SIGN_ERRATUM, delta_phi_unmatched(1.0, 0.0, 10).notes)

    def test_symmetric_limit_consistency(self):
        """Unmatched reduces to exp(xi/2)/(N sqrt(xi)) without disorder"""
        for xi in np.linspace(0.01, 5.0, 37):
            expected = math.exp(xi / 2) / (100 * math.sqrt(xi))
            np.testing.assert_allclose(delta_phi_unmatched(xi, 0.0, 100).delta_phi, expected, rtol=1e-14)

    def test_heisenberg_scaling(self):
        """N * delta_phi_matched is independent of N"""
        reference = 100 * delta_phi_matched(1.0, 1.0, 100).delta_phi
        for n_atoms in (10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6):
            scaled = n_atoms * delta_phi_matched(1.0, 1.0, n_atoms).delta_phi
            np.testing.assert_allclose(scaled, reference, rtol=1e-12)

    def test_monotonic_in_disorder(self):
        """Every protocol's phase error is non-decreasing in dg2"""
        dg2_grid = np.linspace(0.0, 2.0, 41)
        for protocol in Protocol:
            values = [delta_phi(protocol, 0.7, dg2, 50).delta_phi for dg2 in dg2_grid]
            self.assertTrue(np.all(np.diff(values) >= 0.0), protocol)

    def test_matched_beats_unmatched_at_large_disorder(self):
        """Within xi*dg2 <= 0.2, N xi dg2 > 3 makes unmatched worse than matched"""
        for n_atoms in (100, 1000, 10000):
            for xi in (0.5, 1.0, 2.0):
                for dg2 in (0.02, 0.05, 0.1):
                    if n_atoms * xi * dg2 <= 3 or xi * dg2 > 0.2:
                        continue
                    self.assertGreater(
                        delta_phi_unmatched(xi, dg2, n_atoms).delta_phi,
                        delta_phi_matched(xi, dg2, n_atoms).delta_phi,
                    )

    def test_eta(self):
        """eta = sqrt(N) * delta_phi"""
        result = delta_phi_matched(0.8, 0.1, 64)
        self.assertEqual(result.eta, math.sqrt(64) * result.delta_phi)

    def test_regime_without_photon_number(self):
        """Photon-number margins are unknown to the closed forms"""
        result = delta_phi_unmatched(1.0, 0.01, 1000)
        self.assertIsNone(result.regime.small_kick)
        self.assertIsNone(result.regime.photon_dominance)
        self.assertAlmostEqual(result.regime.small_disorder_xi, 0.01)
        self.assertAlmostEqual(result.regime.inhomogeneity_criterion, 10.0)
        self.assertFalse(result.regime.satisfied('inhomogeneity_criterion'))

    def test_regime_with_photon_number(self):
        """Passing n fills in the interaction margins"""
        result = delta_phi_matched(1.0, 0.0, 4, n_photons=4096)
        self.assertAlmostEqual(result.regime.photon_dominance, 0.25)
        self.assertAlmostEqual(result.regime.small_bend, 4 / 1024)

    def test_invalid_inputs(self):
        """Zero xi diverges and negative inputs are rejected"""
        with self.assertRaises(DivergenceError):
            delta_phi_matched(0.0, 0.0, 10)
        with self.assertRaises(ParameterError):
            delta_phi_unmatched(1.0, -0.1, 10)
        with self.assertRaises(ParameterError):
            delta_phi_stored(-1.0, 0.0, 10)
        with self.assertRaises(ParameterError):
            delta_phi_stored(1.0, 0.0, 0)


class SignalMomentsTestCase(SimpleTestCase):
    """Tests for the (variance, slope) pairs"""

    def test_ratio_reproduces_phase_error(self):
        """sqrt(variance)/|slope| equals delta_phi for every protocol"""
        for protocol in Protocol:
            for xi, dg2 in [(1.0, 0.0), (0.4, 0.3), (2.5, 0.05)]:
                variance, slope = signal_moments(protocol, xi, dg2, 20, 4096)
                expected = delta_phi(protocol, xi, dg2, 20).delta_phi
                np.testing.assert_allclose(math.sqrt(variance) / abs(slope), expected, rtol=1e-12)

    def test_slope_signs(self):
        """Unmatched and matched slopes are negative, stored is positive"""
        self.assertLess(signal_moments('unmatched', 1.0, 0.0, 4, 400)[1], 0.0)
        self.assertLess(signal_moments('matched', 1.0, 0.0, 4, 400)[1], 0.0)
        self.assertGreater(signal_moments('stored', 1.0, 0.0, 4, 400)[1], 0.0)

    def test_probe_variances(self):
        """Matched probe noise is n/2, stored probe noise is n/4"""
        self.assertEqual(signal_moments('matched', 1.0, 0.2, 4, 400)[0], 200.0)
        self.assertEqual(signal_moments('stored', 1.0, 0.2, 4, 400)[0], 100.0)


class OptimalXiTestCase(SimpleTestCase):
    """Tests for the xi optimizer"""

    def test_symmetric_unmatched_minimum(self):
        """xi* = 1 and delta_phi_min = sqrt(e)/N for every N"""
        for n_atoms in (10, 100, 10000):
            xi_star, minimum = optimal_xi(0.0, n_atoms, 'unmatched')
            self.assertAlmostEqual(xi_star, 1.0, places=6)
            np.testing.assert_allclose(minimum, math.sqrt(math.e) / n_atoms, rtol=1e-12)

    def test_symmetric_matched_minimum(self):
        """xi* = 1 and delta_phi_min = sqrt(2e)/N for every N"""
        for n_atoms in (10, 100, 10000):
            xi_star, minimum = optimal_xi(0.0, n_atoms, 'matched')
            self.assertAlmostEqual(xi_star, 1.0, places=6)
            np.testing.assert_allclose(minimum, math.sqrt(2 * math.e) / n_atoms, rtol=1e-12)

    def test_disordered_matched_minimum(self):
        """Unit disorder moves the matched optimum to the root of 2 xi^2 + 2 xi - 1"""
        with self.assertNoLogs('formulas', level='WARNING'):
            xi_star, minimum = optimal_xi(1.0, 100, Protocol.MATCHED)
        self.assertAlmostEqual(xi_star, (math.sqrt(3.0) - 1.0) / 2.0, places=6)
        self.assertEqual(minimum, phase_error_value(Protocol.MATCHED, xi_star, 1.0, 100))

        grid = np.linspace(0.2, 0.6, 40001)
        dense = [delta_phi_matched(x, 1.0, 100).delta_phi for x in grid]
        self.assertAlmostEqual(grid[int(np.argmin(dense))], xi_star, places=4)

    def test_local_minimum(self):
        """delta_phi(xi* +- 1e-4 xi*) >= delta_phi(xi*)"""
        for protocol in Protocol:
            for dg2 in (0.0, 0.01, 0.5):
                xi_star, minimum = optimal_xi(dg2, 200, protocol)
                for step in (-1e-4, 1e-4):
                    neighbour = delta_phi(protocol, xi_star * (1 + step), dg2, 200).delta_phi
                    self.assertGreaterEqual(neighbour, minimum)

    def test_extrapolated_optimum_warns_once(self):
        """Only an optimum with xi*dg2 >= 1 is reported as extrapolated"""
        with self.assertLogs('formulas', level='WARNING') as logs:
            xi_star, _ = optimal_xi(1.0, 100, 'unmatched', xi_min=1.5)
        self.assertAlmostEqual(xi_star, 1.5, places=5)
        extrapolated = [line for line in logs.output if 'extrapolated' in line]
        self.assertEqual(len(extrapolated), 1)

    def test_negative_disorder_rejected(self):
        """dg2 < 0 is a parameter error"""
        with self.assertRaises(ParameterError):
            optimal_xi(-0.1, 10, 'matched')

    def test_boundary_hit_is_logged(self):
        """A search interval that excludes the optimum warns and returns the edge"""
        with self.assertLogs('formulas.services.optimizer', level='WARNING'):
            xi_star, _ = optimal_xi(0.0, 10, 'matched', xi_max=0.5)
        self.assertAlmostEqual(xi_star, 0.5, places=5)


class FormulaAPITestCase(APITestCase):
    """Tests for the formula endpoints"""

    def test_phase_error(self):
        """POST phase-error returns the closed form with its decomposition"""
        response = self.client.post(
            '/api/formulas/phase-error/',
            {'xi': 1.0, 'dg2': 0.0, 'n_atoms': 100, 'protocol': 'unmatched'},
            format='json',
        )
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertAlmostEqual(response.data['delta_phi'], 0.01648721, places=8)
        self.assertAlmostEqual(response.data['eta'], 10 * response.data['delta_phi'])
        self.assertIn('regime', response.data)

    def test_phase_error_rejects_zero_xi(self):
        """xi = 0 is a validation error"""
        response = self.client.post(
            '/api/formulas/phase-error/',
            {'xi': 0.0, 'n_atoms': 100},
            format='json',
        )
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('xi', response.data)

    def test_phase_error_rejects_unknown_protocol(self):
        """Unknown protocol names are rejected"""
        response = self.client.post(
            '/api/formulas/phase-error/',
            {'xi': 1.0, 'n_atoms': 100, 'protocol': 'teleported'},
            format='json',
        )
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)

    def test_optimal_xi(self):
        """POST optimal-xi returns the argmin and the minimum"""
        response = self.client.post(
            '/api/formulas/optimal-xi/',
            {'dg2': 0.0, 'n_atoms': 100, 'protocol': 'matched'},
            format='json',
        )
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertAlmostEqual(response.data['xi_star'], 1.0, places=6)
        self.assertAlmostEqual(response.data['delta_phi_min'], math.sqrt(2 * math.e) / 100, places=10)
