"""
Tests for the exact simulator: state preparation, unitaries, moments against
the product-basis reference and the moment oracle, reduced states, squeezing
and snapshots.
"""
import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from ensembles.domain import CouplingDistribution, EnsembleConfig, Protocol, ProtocolParams
from ensembles.exceptions import (
    CapacityError,
    DegenerateProtocolError,
    DescriptorError,
    MeanSpinDegenerateError,
    ParameterError,
)
from oracle.services.characteristic import product
from oracle.services.moment_oracle import exact_delta_phi, exact_moments
from .domain import AtomicReducedState, QuantumState, StateDims
from .services.observables import (
    AtomicComponent,
    Observable,
    apply_atomic,
    atomic_spin,
    probe_spin,
    readout_signal,
)
from .services.product_basis import ProductBasisState, product_basis_moments
from .services.reduced import atomic_reduced, squeezing_params, stage_squeezing
from .services.snapshot import dump_state, load_state
from .services.state_vector import (
    STAGE_INITIAL,
    STAGE_QND,
    STAGE_REVERSED_QND,
    STAGE_ROTATION,
    apply_qnd,
    apply_rotation,
    check_capacity,
    covariance,
    expectation,
    final_state,
    initial_state,
    run_protocol,
    simulate_moments,
    stage_states,
)


def random_config(n_atoms, n_photons, seed):
    return EnsembleConfig.build(n_atoms, n_photons, CouplingDistribution('gaussian', variance=0.2, seed=seed))


def f_z(n_atoms):
    return atomic_spin('z', np.ones(n_atoms))


class InitialStateTestCase(SimpleTestCase):
    """Tests for initial_state and the capacity check"""

    def test_single_atom_single_photon(self):
        """N=1, n=1 gives four equal amplitudes 1/2"""
        state = initial_state(EnsembleConfig.uniform(1, 1), pulses=1)
        self.assertEqual(state.amplitudes.shape, (2, 2))
        np.testing.assert_allclose(state.amplitudes, 0.5, atol=1e-15)

    def test_photon_amplitudes(self):
        """N=2, n=2: the probe carries (1/2, 1/sqrt2, 1/2)"""
        state = initial_state(EnsembleConfig.uniform(2, 2), pulses=1)
        np.testing.assert_allclose(state.amplitudes[0] / 0.5, [0.5, 1 / math.sqrt(2), 0.5], atol=1e-15)

    def test_coherent_moments(self):
        """<S_x> = n/2, Var(S_y) = n/4, <F_z> = 0 and Var(F_z) = N/4"""
        state = initial_state(EnsembleConfig.uniform(3, 50), pulses=1)
        self.assertAlmostEqual(expectation(state, probe_spin(0, 'x')), 25.0, places=12)
        self.assertAlmostEqual(covariance(state, probe_spin(0, 'y'), probe_spin(0, 'y')), 12.5, places=12)
        self.assertAlmostEqual(expectation(state, f_z(3)), 0.0, places=14)
        self.assertAlmostEqual(covariance(state, f_z(3), f_z(3)), 0.75, places=14)

    def test_two_pulses(self):
        """The second pulse adds another Dicke axis"""
        state = initial_state(EnsembleConfig.uniform(2, 3), pulses=2)
        self.assertEqual(state.amplitudes.shape, (4, 4, 4))
        self.assertAlmostEqual(state.norm, 1.0, places=14)

    def test_invalid_pulses(self):
        """Only one or two probe pulses are supported"""
        with self.assertRaises(ParameterError):
            initial_state(EnsembleConfig.uniform(1, 1), pulses=3)

    def test_capacity(self):
        """The amplitude cap and the atom cap both raise CapacityError"""
        with self.assertRaises(CapacityError) as ctx:
            initial_state(EnsembleConfig.uniform(4, 100), pulses=2, cap=1000)
        self.assertEqual(ctx.exception.required, 16 * 101 * 101)
        self.assertEqual(ctx.exception.cap, 1000)
        with self.assertRaises(CapacityError) as ctx:
            check_capacity(15, 1, 1)
        self.assertEqual(ctx.exception.dimension, 'atoms')


class UnitaryTestCase(SimpleTestCase):
    """Tests for apply_qnd and apply_rotation"""

    def test_zero_interaction(self):
        """chi = 0 leaves the state unchanged"""
        cfg = random_config(3, 5, seed=2)
        state = initial_state(cfg, pulses=1)
        np.testing.assert_array_equal(apply_qnd(state, 0.0, cfg).amplitudes, state.amplitudes)

    def test_qnd_phase(self):
        """(up, m=+1/2) picks up exp(-i pi/4) at chi = pi"""
        cfg = EnsembleConfig.uniform(1, 1)
        state = apply_qnd(initial_state(cfg, pulses=1), math.pi, cfg)
        self.assertAlmostEqual(state.amplitudes[0, 1], 0.5 * np.exp(-1j * math.pi / 4), places=15)

    def test_qnd_inverse(self):
        """QND with sign +1 then -1 restores the state"""
        cfg = random_config(4, 12, seed=5)
        state = initial_state(cfg, pulses=1)
        there = apply_qnd(state, 0.7, cfg, sign=1)
        back = apply_qnd(there, 0.7, cfg, sign=-1)
        np.testing.assert_allclose(back.amplitudes, state.amplitudes, atol=1e-12)

    def test_f_z_conserved(self):
        """<F_z> and Var(F_z) are unchanged by the interaction"""
        cfg = random_config(4, 12, seed=6)
        state = apply_rotation(initial_state(cfg, pulses=1), 0.3)
        after = apply_qnd(state, 0.9, cfg)
        self.assertAlmostEqual(expectation(after, f_z(4)), expectation(state, f_z(4)), places=12)
        self.assertAlmostEqual(covariance(after, f_z(4), f_z(4)), covariance(state, f_z(4), f_z(4)), places=12)

    def test_absent_pulse(self):
        """A second-pulse interaction or observable on a one-pulse state is rejected"""
        cfg = EnsembleConfig.uniform(2, 4)
        state = initial_state(cfg, pulses=1)
        with self.assertRaises(ParameterError):
            apply_qnd(state, 0.1, cfg, pulse=1)
        with self.assertRaises(DescriptorError):
            expectation(state, probe_spin(1, 'y'))

    def test_rotation_pi(self):
        """A pi rotation about y maps up to down"""
        amplitudes = np.zeros((2, 2), dtype=complex)
        amplitudes[0, 0] = 1.0
        state = apply_rotation(QuantumState(amplitudes, StateDims(1, 1, 1)), math.pi)
        self.assertAlmostEqual(abs(state.amplitudes[1, 0]), 1.0, places=15)
        self.assertAlmostEqual(abs(state.amplitudes[0, 0]), 0.0, places=15)

    def test_rotation_mean(self):
        """<F_z> = -(N/2) sin(phi) on the coherent state"""
        state = apply_rotation(initial_state(EnsembleConfig.uniform(3, 2), pulses=1), 0.4)
        self.assertAlmostEqual(expectation(state, f_z(3)), -1.5 * math.sin(0.4), places=14)

    def test_norm_preserved(self):
        """Every stage keeps unit norm"""
        cfg = random_config(4, 10, seed=8)
        for protocol in Protocol:
            for stage, state in stage_states(cfg, ProtocolParams(chi=0.8, phi=0.2, protocol=protocol)):
                self.assertAlmostEqual(state.norm, 1.0, delta=1e-12, msg=(protocol, stage))


class ObservableTestCase(SimpleTestCase):
    """Tests for observable descriptors"""

    def test_unknown_axis(self):
        """Axes other than x, y, z are rejected"""
        with self.assertRaises(DescriptorError):
            AtomicComponent('w', (1.0,))

    def test_weight_count(self):
        """An atomic component must carry one weight per atom"""
        with self.assertRaises(DescriptorError):
            apply_atomic(AtomicComponent('x', (1.0, 1.0)), np.ones(8), 3)

    def test_readout_signal(self):
        """Signals are linear combinations of the base observables"""
        cfg = EnsembleConfig.uniform(2, 10)
        matched = readout_signal(cfg, Protocol.MATCHED, 0.1)
        self.assertEqual(matched.label, 'A')
        self.assertEqual(sorted(c for c, _ in matched.terms), [-1.0, 1.0])
        unmatched = readout_signal(cfg, Protocol.UNMATCHED, 0.1)
        self.assertEqual(unmatched.label, 'Fp_z')
        self.assertIn(-2.0, [c for c, _ in unmatched.terms])
        with self.assertRaises(DegenerateProtocolError):
            readout_signal(cfg, Protocol.UNMATCHED, 0.0)

    def test_linear(self):
        """Observable.linear scales and merges terms"""
        combined = Observable.linear('D', [(2.0, probe_spin(0, 'y')), (-0.5, f_z(2))])
        self.assertEqual([c for c, _ in combined.terms], [2.0, -0.5])


class MomentTestCase(SimpleTestCase):
    """Dicke-ladder moments against the product-basis reference and the moment oracle"""

    def test_product_basis_agreement(self):
        """Ladder and product basis agree within 1e-10"""
        sizes = [(1, 1), (2, 3), (3, 4), (4, 6)]
        for seed, (n_atoms, n_photons) in enumerate(sizes):
            cfg = random_config(n_atoms, n_photons, seed=seed)
            for chi in (0.1, 0.5, 1.0):
                for phi in (0.0, 0.05):
                    for protocol in Protocol:
                        params = ProtocolParams(chi=chi, phi=phi, protocol=protocol)
                        ladder = simulate_moments(cfg, params)
                        reference = product_basis_moments(cfg, params)
                        self.assertEqual(ladder.labels, reference.labels)
                        np.testing.assert_allclose(ladder.means, reference.means, atol=1e-10)
                        np.testing.assert_allclose(ladder.covariance, reference.covariance, atol=1e-10)

    def test_product_basis_capacity(self):
        """The product basis refuses more qubits than configured"""
        with self.assertRaises(CapacityError):
            ProductBasisState(EnsembleConfig.uniform(4, 10), pulses=2)

    def test_oracle_agreement(self):
        """Simulator and moment oracle agree within 1e-9"""
        for seed, (n_atoms, n_photons) in enumerate([(2, 7), (5, 32), (6, 64)]):
            cfg = random_config(n_atoms, n_photons, seed=seed + 30)
            for phi in (0.0, 0.05):
                for protocol in Protocol:
                    params = ProtocolParams(chi=0.3, phi=phi, protocol=protocol)
                    simulated = simulate_moments(cfg, params)
                    oracle = exact_moments(cfg, params)
                    self.assertEqual(simulated.labels, oracle.labels)
                    np.testing.assert_allclose(simulated.means, oracle.means, atol=1e-9)
                    np.testing.assert_allclose(simulated.covariance, oracle.covariance, atol=1e-9)

    def test_matched_variance(self):
        """Var(A) at phi = 0 for N=2, n=4, g=(0.5, 1.5), chi=0.2"""
        cfg = EnsembleConfig(n_atoms=2, n_photons=4, weights=[0.5, 1.5])
        moments = simulate_moments(cfg, ProtocolParams(chi=0.2, protocol='matched'))
        self.assertAlmostEqual(moments.variance('A'), 1.9505627, places=7)

    def test_matched_variance_identity(self):
        """Var(A) = (n/2)(1 + prod cos(chi g_k))/2 for 20 random weight vectors"""
        for seed in range(20):
            cfg = random_config(3 + seed % 3, 16 + 4 * (seed % 5), seed=seed + 40)
            moments = simulate_moments(cfg, ProtocolParams(chi=0.35, protocol='matched'))
            expected = cfg.n_photons / 2 * (1 + product(np.cos(0.35 * cfg.weights))) / 2
            self.assertAlmostEqual(moments.variance('A'), expected, delta=1e-9)

    def test_stored_halving(self):
        """Var(B)/Var(A) -> 1/2 on simulated moments for small N chi^2"""
        cfg = EnsembleConfig.uniform(3, 100)
        params = ProtocolParams.from_xi(0.01, 100)
        self.assertLessEqual(cfg.n_atoms * params.chi ** 2, 0.01)
        var_a = simulate_moments(cfg, params.with_protocol('matched')).variance('A')
        var_b = simulate_moments(cfg, params.with_protocol('stored')).variance('B')
        self.assertAlmostEqual(var_b / var_a, 0.5, delta=0.01)

    def test_probe_heisenberg_moments(self):
        """<S_y> and Var(S_y) after the interaction follow the characteristic-function forms"""
        cfg = random_config(3, 20, seed=9)
        chi = 0.3
        moments = simulate_moments(cfg, ProtocolParams(chi=chi, protocol='unmatched'))
        p2 = product(np.cos(chi * cfg.weights))
        n = cfg.n_photons
        self.assertAlmostEqual(moments.mean('S_y'), 0.0, delta=1e-9)
        self.assertAlmostEqual(moments.variance('S_y'), n * n / 4 * (1 - p2) / 2 + n / 4 * (1 + p2) / 2, delta=1e-9)


class RunProtocolTestCase(SimpleTestCase):
    """Tests for the simulated phase error"""

    def test_matched_desk_scale(self):
        """N=3, n=400, xi=1 matched is within 6% of sqrt(2e)/3"""
        cfg = EnsembleConfig.uniform(3, 400)
        result = run_protocol(cfg, ProtocolParams.from_xi(1.0, 400, protocol='matched'))
        self.assertAlmostEqual(result.delta_phi / 0.777215, 1.0, delta=0.06)
        self.assertEqual(result.protocol, Protocol.MATCHED)

    def test_stored_improvement(self):
        """Stored over matched is 1/sqrt(2) within 2%"""
        cfg = EnsembleConfig.uniform(3, 400)
        params = ProtocolParams.from_xi(1.0, 400)
        matched = run_protocol(cfg, params.with_protocol('matched')).delta_phi
        stored = run_protocol(cfg, params.with_protocol('stored')).delta_phi
        self.assertAlmostEqual(stored / matched, 1 / math.sqrt(2), delta=0.02 / math.sqrt(2))

    def test_agrees_with_oracle(self):
        """Simulated and oracle phase errors coincide"""
        cfg = random_config(3, 24, seed=12)
        for protocol in Protocol:
            params = ProtocolParams(chi=0.4, protocol=protocol)
            simulated = run_protocol(cfg, params).delta_phi
            oracle = exact_delta_phi(cfg, params, slope='richardson').delta_phi
            np.testing.assert_allclose(simulated, oracle, rtol=1e-9)

    def test_zero_interaction(self):
        """chi = 0 has no signal"""
        with self.assertRaises(DegenerateProtocolError):
            run_protocol(EnsembleConfig.uniform(2, 4), ProtocolParams(chi=0.0, protocol='unmatched'))

    def test_capacity(self):
        """Oversized runs fail before simulating"""
        with self.assertRaises(CapacityError):
            run_protocol(EnsembleConfig.uniform(3, 400), ProtocolParams(chi=0.1, protocol='matched'), cap=10 ** 4)


class ReducedStateTestCase(SimpleTestCase):
    """Tests for atomic_reduced"""

    def test_initial_state_pure(self):
        """Before any interaction the atoms are a pure coherent state"""
        rho = atomic_reduced(initial_state(EnsembleConfig.uniform(3, 6), pulses=1))
        self.assertAlmostEqual(rho.trace, 1.0, places=12)
        self.assertAlmostEqual(rho.purity, 1.0, places=12)
        self.assertTrue(rho.is_hermitian)

    def test_zero_interaction_pure(self):
        """chi = 0 keeps the atoms pure"""
        cfg = EnsembleConfig.uniform(2, 8)
        state = apply_qnd(initial_state(cfg, pulses=1), 0.0, cfg)
        self.assertAlmostEqual(atomic_reduced(state).purity, 1.0, places=12)

    def test_entangled_after_interaction(self):
        """N=2, n=8, chi=0.4 leaves the atoms mixed"""
        cfg = EnsembleConfig.uniform(2, 8)
        rho = atomic_reduced(apply_qnd(initial_state(cfg, pulses=1), 0.4, cfg))
        self.assertLess(rho.purity, 1.0 - 1e-6)
        self.assertAlmostEqual(rho.trace, 1.0, places=12)
        self.assertTrue(rho.is_hermitian)
        self.assertGreaterEqual(np.linalg.eigvalsh(rho.density)[0], -1e-12)

    def test_capacity(self):
        """The density matrix obeys the amplitude cap"""
        state = initial_state(EnsembleConfig.uniform(2, 2), pulses=1)
        with self.assertRaises(CapacityError):
            atomic_reduced(state, cap=15)


class SqueezingTestCase(SimpleTestCase):
    """Tests for squeezing_params and stage_squeezing"""

    def test_coherent_state(self):
        """The coherent state has both parameters equal to 1"""
        squeezing = squeezing_params(atomic_reduced(initial_state(EnsembleConfig.uniform(4, 3), pulses=1)))
        self.assertAlmostEqual(squeezing.xi_ku2, 1.0, places=12)
        self.assertAlmostEqual(squeezing.xi_w2, 1.0, places=12)
        self.assertFalse(squeezing.mean_spin_degenerate)

    def test_maximally_mixed(self):
        """Zero mean spin flags the Wineland parameter"""
        rho = AtomicReducedState(np.eye(4, dtype=complex) / 4, 2)
        xi_ku2, xi_w2 = squeezing_params(rho)
        self.assertTrue(math.isinf(xi_w2))
        self.assertAlmostEqual(xi_ku2, 1.0, places=12)
        self.assertTrue(squeezing_params(rho).mean_spin_degenerate)
        with self.assertRaises(MeanSpinDegenerateError):
            squeezing_params(rho, strict=True)

    def test_stored_never_squeezed(self):
        """Stored protocol, N=4, n=1024, xi=1: both parameters stay >= 1 at every stage"""
        cfg = EnsembleConfig.uniform(4, 1024)
        params = ProtocolParams.from_xi(1.0, 1024, protocol='stored')
        stages = stage_squeezing(cfg, params)
        self.assertEqual(
            [s.stage for s in stages],
            [STAGE_INITIAL, STAGE_QND, STAGE_ROTATION, STAGE_REVERSED_QND],
        )
        for entry in stages:
            self.assertGreaterEqual(entry.squeezing.xi_ku2, 1.0 - 1e-9, entry.stage)
            self.assertGreaterEqual(entry.squeezing.xi_w2, 1.0 - 1e-9, entry.stage)
        self.assertLess(stages[1].purity, 1.0)
        eta = run_protocol(cfg, params).eta
        self.assertLess(eta, 1.0)

    def test_zero_interaction(self):
        """chi = 0 gives exactly 1 at every stage"""
        cfg = EnsembleConfig.uniform(3, 16)
        for entry in stage_squeezing(cfg, ProtocolParams(chi=0.0, protocol='stored')):
            self.assertAlmostEqual(entry.squeezing.xi_ku2, 1.0, places=12)
            self.assertAlmostEqual(entry.squeezing.xi_w2, 1.0, places=12)


class SnapshotTestCase(SimpleTestCase):
    """Tests for dump_state and load_state"""

    def test_dump_and_load(self):
        """A dumped final state reloads with the same dimensions and amplitudes"""
        cfg = random_config(3, 5, seed=13)
        state = final_state(cfg, ProtocolParams(chi=0.5, phi=0.1, protocol='matched'))
        with tempfile.TemporaryDirectory() as tmp:
            path = dump_state(state, Path(tmp) / 'state.bin')
            self.assertEqual(path.stat().st_size, 3 * 8 + 16 * state.dims.size)
            loaded = load_state(path)
        self.assertEqual(loaded.dims, state.dims)
        np.testing.assert_array_equal(loaded.amplitudes, state.amplitudes)

    def test_truncated_file(self):
        """A snapshot with missing amplitudes is rejected"""
        state = initial_state(EnsembleConfig.uniform(2, 3), pulses=1)
        with tempfile.TemporaryDirectory() as tmp:
            path = dump_state(state, Path(tmp) / 'state.bin')
            path.write_bytes(path.read_bytes()[:-16])
            with self.assertRaises(ParameterError):
                load_state(path)
