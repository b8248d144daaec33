import math

import numpy as np
import pytest

from sparseiqc import model
from sparseiqc.errors import DimensionError, WellPosednessError
from sparseiqc.model import (
    INF,
    Network,
    StateSpace,
    Subsystem,
    UncertaintySpec,
    augment,
    brute_force_stability,
    build_network,
    check_well_posed,
    eval_frequency,
    load_network,
    lumped_transfer,
    network_from_json,
    network_to_json,
    save_network,
)

from conftest import first_order, isolated_network, siso_subsystem, static


def lag():  # 1 / (s + 1)
    return StateSpace([[-1.0]], [[1.0]], [[1.0]], [[0.0]])


class TestStateSpace:
    def test_dimension_validation(self):
        with pytest.raises(DimensionError):
            StateSpace(np.zeros((2, 1)), np.zeros((2, 1)), np.zeros((1, 2)), [[0.0]])
        with pytest.raises(DimensionError):
            StateSpace([[-1.0]], [[1.0]], [[1.0]], np.zeros((2, 2)))

    def test_hurwitz_enforced(self):
        with pytest.raises(ValueError, match="Hurwitz"):
            StateSpace([[1.0]], [[1.0]], [[1.0]], [[0.0]])
        StateSpace([[1.0]], [[1.0]], [[1.0]], [[0.0]], stable=False)

    def test_static_gain(self):
        ss = StateSpace.from_gain([[2.0, 0.0]])
        assert ss.n_states == 0 and ss.n_outputs == 1 and ss.n_inputs == 2

    def test_immutable(self):
        ss = lag()
        with pytest.raises(ValueError):
            ss.a[0, 0] = 5.0


class TestEvalFrequency:
    def test_static_gain_at_zero(self):
        assert np.allclose(eval_frequency(lag(), 0.0), [[1.0]])

    def test_d_matrix_limit(self):
        assert np.allclose(eval_frequency(lag(), INF), [[0.0]])

    def test_complex_value(self):
        # 1 / (1 + j)
        assert np.allclose(eval_frequency(lag(), 1.0), [[0.5 - 0.5j]])

    def test_rejects_negative_frequency(self):
        with pytest.raises(ValueError):
            eval_frequency(lag(), -1.0)


class TestBuildNetwork:
    def test_decoupled(self):
        subs = [siso_subsystem(lag()), siso_subsystem(lag())]
        net = build_network(subs, np.zeros((2, 2)))
        assert net.gamma_entries == ()
        assert net.interconnection_edges() == ()

    def test_swap_coupling(self):
        subs = [siso_subsystem(lag()), siso_subsystem(lag())]
        net = build_network(subs, [[0.0, 1.0], [1.0, 0.0]])
        assert net.gamma_entries == ((0, 1), (1, 0))
        assert net.interconnection_edges() == ((0, 1),)
        assert net.w_sources(0) == (1,)

    def test_non_01_entry(self):
        subs = [siso_subsystem(lag()), siso_subsystem(lag())]
        with pytest.raises(ValueError, match="non-0-1"):
            build_network(subs, [[0.0, 2.0], [1.0, 0.0]])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            build_network([siso_subsystem(lag())], np.zeros((2, 2)))

    def test_entry_triple_form(self):
        subs = [siso_subsystem(lag()), siso_subsystem(lag())]
        net = build_network(subs, (2, 2, [(0, 1), (1, 0)]))
        assert net.gamma_dense().tolist() == [[0.0, 1.0], [1.0, 0.0]]
        with pytest.raises(ValueError, match="duplicate"):
            build_network(subs, (2, 2, [(0, 1), (0, 1)]))


class TestLumpedTransfer:
    def test_gamma_zero_reduces_to_gpq(self):
        subs = [siso_subsystem(lag()), siso_subsystem(lag())]
        net = build_network(subs, np.zeros((2, 2)))
        for omega in (0.0, 1.0, 10.0, INF):
            assert np.allclose(lumped_transfer(net, omega), net.g_pq(omega))

    def test_siso_self_loop(self):
        sub = siso_subsystem(
            static([[0.0]]), static([[1.0]]), static([[1.0]]), static([[0.0]])
        )
        net = build_network([sub], [[1.0]])
        assert np.allclose(lumped_transfer(net, 0.3), [[1.0]])

    def test_self_loop_with_feedthrough(self):
        sub = siso_subsystem(
            static([[0.0]]), static([[1.0]]), static([[1.0]]), static([[0.5]])
        )
        net = build_network([sub], [[1.0]])
        assert np.allclose(lumped_transfer(net, 2.0), [[2.0]])

    def test_ill_posed_raises(self):
        sub = siso_subsystem(
            static([[0.0]]), static([[1.0]]), static([[1.0]]), static([[1.0]])
        )
        net = build_network([sub], [[1.0]])
        with pytest.raises(WellPosednessError):
            lumped_transfer(net, 1.0)


class TestWellPosedness:
    def grid(self):
        return (0.0, 1.0, 10.0)

    def test_exactly_singular(self):
        sub = siso_subsystem(
            static([[0.0]]), static([[1.0]]), static([[1.0]]), static([[1.0]])
        )
        net = build_network([sub], [[1.0]])
        report = check_well_posed(net, self.grid(), 1e-6)
        assert not report.passed
        assert all(s <= 1e-12 for _, s in report.records)

    def test_gamma_zero_identity(self):
        subs = [siso_subsystem(lag())]
        net = build_network(subs, np.zeros((1, 1)))
        report = check_well_posed(net, self.grid(), 1e-6)
        assert report.passed
        assert all(abs(s - 1.0) < 1e-12 for _, s in report.records)

    def test_half_gain(self):
        sub = siso_subsystem(
            static([[0.0]]), static([[1.0]]), static([[1.0]]), static([[0.5]])
        )
        net = build_network([sub], [[1.0]])
        report = check_well_posed(net, self.grid(), 1e-6)
        assert report.passed
        assert all(abs(s - 0.5) < 1e-12 for _, s in report.records)


class TestAugment:
    def test_siso_block_pattern(self):
        sub = siso_subsystem(lag(), static([[2.0]]), static([[3.0]]), static([[0.5]]))
        net = build_network([sub], [[1.0]])
        aug = augment(net, [UncertaintySpec("identity", 1)])
        blocks = aug.subsystem_augmented_blocks(0, 0.0)
        assert blocks["pbar_qbar"].shape == (2, 2)
        assert np.allclose(blocks["pbar_qbar"], [[1.0, 2.0], [0.0, 0.0]])
        assert np.allclose(blocks["pbar_w"], [[0.0], [1.0]])
        assert np.allclose(blocks["z_qbar"], [[3.0, 0.5]])

    def test_identity_closure_preserves_transfers(self, rng):
        from conftest import random_coupled_network

        net = random_coupled_network(rng, 4, extra_edges=2, gain=0.4)
        aug = augment(
            net, [UncertaintySpec("identity", m) for m in net.m_dims]
        )
        for omega in (0.0, 0.7, 5.0, INF):
            gt = aug.g_tilde(omega)
            d, m = net.d_total, net.m_total
            # close q_A = p_A in the augmented description
            inner = np.eye(m) - gt[d:, d:]
            qa = np.linalg.solve(inner, gt[d:, :d])
            p_transfer = gt[:d, :d] + gt[:d, d:] @ qa
            assert np.allclose(p_transfer, lumped_transfer(net, omega), atol=1e-9)

    def test_dim_bookkeeping(self):
        s1 = siso_subsystem(lag(), static([[1.0]]), static([[1.0]]), static([[0.0]]))
        g_pw = StateSpace.zeros(1, 2)
        g_zq = StateSpace.zeros(2, 1)
        g_zw = StateSpace.zeros(2, 2)
        s2 = Subsystem(lag(), g_pw, g_zq, g_zw, UncertaintySpec("normalized_scalar_gain", 1))
        net = build_network([s1, s2], np.zeros((3, 3)))
        aug = augment(
            net,
            [UncertaintySpec("identity", 1), UncertaintySpec("identity", 2)],
        )
        gt = aug.g_tilde(0.0)
        assert gt.shape == (2 + 3, 2 + 3)
        with pytest.raises(DimensionError):
            augment(net, [UncertaintySpec("identity", 1), UncertaintySpec("identity", 1)])


class TestBruteForce:
    def test_open_loop_stable(self):
        subs = [siso_subsystem(lag()), siso_subsystem(lag())]
        net = build_network(subs, np.zeros((2, 2)))
        scan = brute_force_stability(net, delta_grid=[np.zeros(2)])
        assert scan.robustly_stable

    def test_destabilizing_gain_found(self):
        # loop gain delta on G(s) = 2/(s+1): closed-loop pole at 2*delta - 1
        net = isolated_network(first_order(-1.0, 2.0))
        scan = brute_force_stability(net, points_per_gain=21)
        assert not scan.robustly_stable
        assert scan.kind == "unstable"
        assert scan.counterexample[0] > 0.5

    def test_small_gain_stable(self):
        # G(s) = 1/(s+2): pole at delta - 2 < 0 for all delta in [-1, 1]
        net = isolated_network(first_order(-2.0, 1.0))
        scan = brute_force_stability(net, points_per_gain=41)
        assert scan.robustly_stable

    def test_nominal_matches_hurwitz_check(self, rng):
        from conftest import random_coupled_network

        net = random_coupled_network(rng, 3, gain=0.3)
        scan = brute_force_stability(net, delta_grid=[np.zeros(3)])
        assert scan.robustly_stable


class TestJsonRoundTrip:
    def test_round_trip(self, tmp_path, rng):
        from conftest import random_coupled_network

        net = random_coupled_network(rng, 3, extra_edges=1)
        path = tmp_path / "net.json"
        save_network(net, path)
        net2 = load_network(path)
        assert net2.n_subsystems == net.n_subsystems
        assert net2.gamma_entries == net.gamma_entries
        for omega in (0.0, 1.3):
            assert np.allclose(
                lumped_transfer(net, omega), lumped_transfer(net2, omega)
            )

    def test_schema_fields(self):
        net = isolated_network(first_order(-1.0, 1.0))
        obj = network_to_json(net)
        assert obj["gamma"] == {"rows": 0, "cols": 0, "entries": []}
        assert obj["subsystems"][0]["uncertainty"] == {
            "kind": "normalized_scalar_gain",
            "dim": 1,
        }
        net2 = network_from_json(obj)
        assert net2.subsystems[0].d == 1


def test_lumped_matches_well_posedness(rng):
    """If the well-posedness scan passes, the lumped transfer evaluates."""
    from conftest import random_coupled_network

    grid = (0.0, 0.5, 2.0, INF)
    for k in range(5):
        net = random_coupled_network(
            np.random.default_rng(100 + k), 4, extra_edges=1, gain=0.5
        )
        report = check_well_posed(net, grid, 1e-6)
        if report.passed:
            for omega in grid:
                lumped_transfer(net, omega)
