import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridrf import rfpn
from hybridrf.exceptions import InvalidArgumentError, SingularNetworkError
from hybridrf.rfpn import (
    FULLY_CONNECTED,
    LOSSLESS,
    SUB_ARRAY,
    NetworkLosses,
    PhaseConfig,
    assemble_network,
    build_combiner,
    build_divider,
    build_phase_shifters,
    build_quantization_operator,
    dft_network,
    fit_phases_to_target,
    projection_matrix,
    quantization_error,
    snap_phases,
)

from conftest import crandn


def _random_phases(rng, n, bits=None):
    return PhaseConfig(rng.uniform(-np.pi, np.pi, n), bits)


class TestDivider:
    def test_fully_connected_2x2(self):
        d = build_divider(FULLY_CONNECTED, 2, 2).toarray()
        np.testing.assert_allclose(d, np.array([[1, 0], [1, 0], [0, 1], [0, 1]]) / np.sqrt(2))

    def test_sub_array_4x2(self):
        d = build_divider(SUB_ARRAY, 4, 2).toarray()
        assert d.shape == (4, 2)
        np.testing.assert_allclose(d, np.array([[1, 0], [1, 0], [0, 1], [0, 1]]) / np.sqrt(2))

    def test_loss_scaling(self):
        lossy = build_divider(FULLY_CONNECTED, 2, 2, NetworkLosses(l_s=2.0)).toarray()
        np.testing.assert_allclose(lossy, build_divider(FULLY_CONNECTED, 2, 2).toarray() / np.sqrt(2))

    def test_shapes_and_kron(self):
        d = build_divider(FULLY_CONNECTED, 5, 3).toarray()
        np.testing.assert_allclose(d, np.kron(np.eye(3), np.ones((5, 1))) / np.sqrt(5))

    def test_errors(self):
        with pytest.raises(InvalidArgumentError):
            build_divider(SUB_ARRAY, 5, 2)
        with pytest.raises(InvalidArgumentError):
            build_divider("star", 4, 2)
        with pytest.raises(InvalidArgumentError):
            build_divider(FULLY_CONNECTED, 2, 4)


class TestPhaseShifters:
    def test_zero_is_identity(self):
        np.testing.assert_allclose(build_phase_shifters(PhaseConfig(np.zeros(6))).toarray(), np.eye(6))

    def test_two_bit_snap(self):
        assert PhaseConfig(np.array([0.3]), 2).phases[0] == 0.0
        assert snap_phases([0.3], 2)[0] == 0.0

    def test_unit_modulus(self, rng):
        d = build_phase_shifters(_random_phases(rng, 20)).diagonal()
        np.testing.assert_allclose(np.abs(d), 1.0, atol=1e-15)

    def test_loss(self, rng):
        d = build_phase_shifters(_random_phases(rng, 5), NetworkLosses(l_ps=4.0)).diagonal()
        np.testing.assert_allclose(np.abs(d), 0.5)

    def test_length_mismatch(self, rng):
        with pytest.raises(InvalidArgumentError):
            build_phase_shifters(_random_phases(rng, 5), size=6)
        with pytest.raises(InvalidArgumentError):
            assemble_network(FULLY_CONNECTED, _random_phases(rng, 7), 4, 2)

    @given(bits=st.integers(1, 10), seed=st.integers(0, 2**32 - 1))
    def test_grid_snapping(self, bits, seed):
        p = PhaseConfig(np.random.default_rng(seed).uniform(-10, 10, 50), bits).phases
        k = p * 2**bits / (2 * np.pi)
        assert np.all(np.abs(k - np.round(k)) <= 1e-9)
        assert np.all(p >= -np.pi) and np.all(p < np.pi)

    def test_snap_error_bound(self, rng):
        raw = rng.uniform(-np.pi, np.pi, 1000)
        snapped = snap_phases(raw, 6)
        err = np.abs(np.angle(np.exp(1j * (snapped - raw))))
        assert np.all(err <= np.pi / 2**6 + 1e-12)


class TestCombiner:
    def test_2x2(self):
        c = build_combiner(2, 2).toarray()
        np.testing.assert_allclose(c, np.array([[1, 0, 1, 0], [0, 1, 0, 1]]) / np.sqrt(2))

    def test_single_chain_identity(self):
        np.testing.assert_allclose(build_combiner(3, 1).toarray(), np.eye(3))

    def test_row_power(self):
        c = build_combiner(4, 3, NetworkLosses(l_c=2.0)).toarray()
        np.testing.assert_allclose(np.sum(np.abs(c) ** 2, axis=1), 0.5)


class TestAssemble:
    def test_fully_connected_zero_phases(self):
        net = assemble_network(FULLY_CONNECTED, PhaseConfig(np.zeros(8)), 4, 2)
        np.testing.assert_allclose(net.f_net, np.full((4, 2), 1 / np.sqrt(8)))
        assert net.f_d.shape == (8, 2) and net.f_ps.shape == (8, 8) and net.f_c.shape == (4, 8)

    def test_sub_array_zero_phases(self):
        net = assemble_network(SUB_ARRAY, PhaseConfig(np.zeros(4)), 4, 2)
        expect = np.array([[1, 0], [1, 0], [0, 1], [0, 1]]) / np.sqrt(2)
        np.testing.assert_allclose(net.f_net, expect)

    def test_literal_product(self, rng):
        cfg = _random_phases(rng, 15)
        net = assemble_network(FULLY_CONNECTED, cfg, 5, 3)
        explicit = (np.kron(np.ones((1, 3)), np.eye(5)) / np.sqrt(3)) @ np.diag(np.exp(1j * cfg.phases)) \
            @ (np.kron(np.eye(3), np.ones((5, 1))) / np.sqrt(5))
        np.testing.assert_allclose(net.f_net, explicit, atol=1e-14)
        # phase k*Nt + i drives antenna i from chain k
        np.testing.assert_allclose(np.angle(net.f_net.ravel(order="F")),
                                   snap_phases(cfg.phases, None), atol=1e-12)

    @given(nt=st.integers(1, 16), ntrx=st.integers(1, 4), seed=st.integers(0, 2**32 - 1))
    def test_constant_modulus_law(self, nt, ntrx, seed):
        if ntrx > nt:
            ntrx = nt
        cfg = _random_phases(np.random.default_rng(seed), nt * ntrx)
        f = assemble_network(FULLY_CONNECTED, cfg, nt, ntrx).f_net
        assert np.max(np.abs(np.abs(f) - 1 / np.sqrt(nt * ntrx))) <= 1e-12
        # energy accounting: every column carries 1/Ntrx of a unit input
        np.testing.assert_allclose(np.sum(np.abs(f) ** 2, axis=0), 1 / ntrx, atol=1e-12)

    def test_sub_array_structure(self, rng):
        f = assemble_network(SUB_ARRAY, _random_phases(rng, 12), 12, 3).f_net
        assert np.count_nonzero(f) == 12
        assert np.all(np.count_nonzero(f, axis=1) == 1)
        np.testing.assert_allclose(np.abs(f[f != 0]), 1 / np.sqrt(4))


class TestFitPhases:
    def test_fixed_point(self, rng):
        cfg = _random_phases(rng, 12)
        f = assemble_network(FULLY_CONNECTED, cfg, 4, 3).f_net
        fit = fit_phases_to_target(f, FULLY_CONNECTED)
        np.testing.assert_allclose(np.exp(1j * fit.phases), np.exp(1j * cfg.phases), atol=1e-12)

    def test_single_chain_exact(self, rng):
        target = np.exp(1j * rng.uniform(-np.pi, np.pi, (16, 1))) / 4
        net = assemble_network(FULLY_CONNECTED, fit_phases_to_target(target, FULLY_CONNECTED), 16, 1)
        assert quantization_error(target, net) <= 1e-12

    def test_six_bit_error(self, rng):
        target = crandn(rng, 8, 4)
        fit = fit_phases_to_target(target, FULLY_CONNECTED, 6)
        err = np.angle(np.exp(1j * (fit.phases - np.angle(target).ravel(order="F"))))
        assert np.all(np.abs(err) <= np.pi / 2**6 + 1e-12)

    def test_sub_array_owner(self, rng):
        target = crandn(rng, 6, 2)
        fit = fit_phases_to_target(target, SUB_ARRAY)
        expect = np.concatenate([np.angle(target[:3, 0]), np.angle(target[3:, 1])])
        np.testing.assert_allclose(np.exp(1j * fit.phases), np.exp(1j * expect), atol=1e-12)

    def test_zero_entry_phase(self):
        target = np.zeros((2, 1), dtype=complex)
        assert np.all(fit_phases_to_target(target, FULLY_CONNECTED).phases == 0)

    def test_frobenius_optimal(self, rng):
        # No random perturbation of the fitted phases gets closer to the target.
        target = crandn(rng, 6, 2)
        fit = fit_phases_to_target(target, FULLY_CONNECTED)
        best = quantization_error(target, assemble_network(FULLY_CONNECTED, fit, 6, 2))
        for _ in range(100):
            p = PhaseConfig(fit.phases + rng.normal(0, 0.05, fit.phases.size))
            assert quantization_error(target, assemble_network(FULLY_CONNECTED, p, 6, 2)) >= best - 1e-12


class TestQuantizationOperator:
    def test_shape_2x2(self):
        assert build_quantization_operator(2, 2).p_operator.shape == (4, 16)

    def test_row_sparsity_16x8(self):
        q = build_quantization_operator(16, 8)
        assert q.p_operator.shape == (128, 16384)
        assert q.row_nonzeros().max() <= 128

    def test_budget(self):
        with pytest.raises(InvalidArgumentError):
            build_quantization_operator(64, 8, budget=1000)

    def test_matches_dense_kron(self, rng):
        q = build_quantization_operator(3, 2)
        f_d = build_divider(FULLY_CONNECTED, 3, 2).toarray()
        f_c = build_combiner(3, 2).toarray()
        np.testing.assert_allclose(q.p_operator.toarray(), np.kron(f_d.T, f_c))

    @given(nt=st.integers(1, 16), ntrx=st.integers(1, 4), seed=st.integers(0, 2**32 - 1),
           db=st.tuples(st.floats(0, 6), st.floats(0, 6), st.floats(0, 6)))
    def test_vec_identity(self, nt, ntrx, seed, db):
        ntrx = min(ntrx, nt)
        losses = NetworkLosses.from_db(*db)
        cfg = _random_phases(np.random.default_rng(seed), nt * ntrx)
        q = build_quantization_operator(nt, ntrx, losses)
        f = assemble_network(FULLY_CONNECTED, cfg, nt, ntrx, losses).f_net
        assert np.linalg.norm(q.p_operator @ q.sigma(cfg, losses) - f.ravel(order="F")) <= 1e-12

    def test_sigma_is_vec_of_phase_matrix(self, rng):
        cfg = _random_phases(rng, 6)
        q = build_quantization_operator(3, 2)
        dense = build_phase_shifters(cfg).toarray()
        np.testing.assert_array_equal(q.sigma(cfg), dense.ravel(order="F"))


class TestQuantizationError:
    def test_identical(self, rng):
        net = assemble_network(FULLY_CONNECTED, _random_phases(rng, 8), 4, 2)
        assert quantization_error(net.f_net, net) == 0.0

    @pytest.mark.parametrize("ntrx", [1, 2, 4, 8])
    def test_amplitude_mismatch_law(self, rng, ntrx):
        nt = 16
        target = np.exp(1j * rng.uniform(-np.pi, np.pi, (nt, ntrx))) / np.sqrt(nt)
        net = assemble_network(FULLY_CONNECTED, fit_phases_to_target(target, FULLY_CONNECTED), nt, ntrx)
        expect = np.sqrt(ntrx) * (1 - 1 / np.sqrt(ntrx))
        assert abs(quantization_error(target, net) - expect) <= 1e-9
        if ntrx == 1:
            assert quantization_error(target, net) <= 1e-12

    def test_shape_mismatch(self, rng):
        net = assemble_network(FULLY_CONNECTED, _random_phases(rng, 8), 4, 2)
        with pytest.raises(InvalidArgumentError):
            quantization_error(np.zeros((4, 3)), net)


class TestDft:
    def test_dc_column(self):
        np.testing.assert_allclose(dft_network(4, 1, [0]).f_net[:, 0], np.full(4, 0.5))

    def test_orthonormal(self, rng):
        cols = rng.choice(32, 5, replace=False)
        f = dft_network(32, 5, cols).f_net
        np.testing.assert_allclose(f.conj().T @ f, np.eye(5), atol=1e-12)

    def test_complete(self):
        n = np.arange(8)
        full = np.exp(-2j * np.pi * np.outer(n, n) / 8) / np.sqrt(8)
        np.testing.assert_allclose(dft_network(8, 8, range(8)).f_net, full, atol=1e-14)
        np.testing.assert_allclose(np.fft.fft(np.eye(8)) / np.sqrt(8), full, atol=1e-14)

    def test_stage_product(self, rng):
        net = dft_network(8, 3, [1, 4, 6])
        np.testing.assert_allclose((net.f_c @ net.f_ps @ net.f_d).toarray(), net.f_net, atol=1e-14)

    @pytest.mark.parametrize("cols", [[0, 0], [0, 9], [-1, 2], [1]])
    def test_bad_columns(self, cols):
        with pytest.raises(InvalidArgumentError):
            dft_network(8, 2, cols)


class TestProjection:
    def test_orthonormal_columns(self, rng):
        f = dft_network(16, 4, [0, 3, 5, 9]).f_net
        np.testing.assert_allclose(projection_matrix(f), f @ f.conj().T, atol=1e-12)

    def test_trace_and_scale(self, rng):
        f = crandn(rng, 12, 3)
        p = projection_matrix(f)
        assert abs(np.trace(p).real - 3) <= 1e-9
        np.testing.assert_allclose(projection_matrix((2 - 3j) * f), p, atol=1e-12)

    def test_against_gram_formula(self, rng):
        f = crandn(rng, 10, 4)
        explicit = f @ np.linalg.inv(f.conj().T @ f) @ f.conj().T
        np.testing.assert_allclose(projection_matrix(f), explicit, atol=1e-10)

    def test_rank_deficient(self, rng):
        f = crandn(rng, 8, 1)
        with pytest.raises(SingularNetworkError):
            projection_matrix(np.hstack([f, 2 * f]))
        with pytest.raises(SingularNetworkError):
            projection_matrix(crandn(rng, 2, 3))

    def test_laws_on_random_networks(self, rng):
        for k in range(100):
            nt, ntrx = (256, 8) if k % 10 == 0 else (int(rng.integers(4, 65)), int(rng.integers(1, 5)))
            variant = SUB_ARRAY if k % 2 and nt % ntrx == 0 else FULLY_CONNECTED
            n = nt * ntrx if variant == FULLY_CONNECTED else nt
            p = projection_matrix(assemble_network(variant, _random_phases(rng, n, 6), nt, ntrx))
            assert np.linalg.norm(p @ p - p) <= 1e-10 * nt
            assert np.linalg.norm(p - p.conj().T) <= 1e-12
            assert abs(np.trace(p).real - ntrx) <= 1e-9


def test_losses_db_conversion():
    losses = NetworkLosses.from_db(3.0, 0.0, 10.0)
    assert losses.l_c == pytest.approx(10.0)
    assert losses.l_s == pytest.approx(10 ** 0.3)
    with pytest.raises(InvalidArgumentError):
        NetworkLosses(l_s=0.5)
    assert LOSSLESS == NetworkLosses()
