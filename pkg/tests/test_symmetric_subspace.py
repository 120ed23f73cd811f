import time
from math import comb, pi, sqrt

import numpy as np
import pytest

from symgadget.dynamics import evolve, spectral_gap
from symgadget.gadget import GadgetSpec
from symgadget.perturbation import closed_form_effective, second_order_numeric
from symgadget.spin_model import popcount
from symgadget.symmetric_subspace import (
    SymmetricOperator,
    build_symmetric_walk,
    dicke_amplitudes,
    dicke_vector,
    effective_to_symmetric,
    load_potential_csv,
    plateau_potential,
    project_symmetric,
    save_potential_csv,
    search_sector_potential,
    sector_uniform_state,
    spike_potential,
)


def full_symmetric_hamiltonian(n, gamma, table):
    """Dense 2^n transverse-field + weight-potential matrix (test-local)."""
    dim = 1 << n
    w = popcount(np.arange(dim))
    M = np.diag(np.asarray(table, dtype=float)[w])
    rows = np.arange(dim)
    for q in range(n):
        M[rows, rows ^ (1 << q)] = -gamma
    return M


class TestDicke:
    def test_equal_weight_pair(self):
        amps = dict(dicke_amplitudes(2, 1))
        assert amps == {1: pytest.approx(1 / sqrt(2)), 2: pytest.approx(1 / sqrt(2))}

    def test_extreme_sector_is_single_state(self):
        amps = dicke_amplitudes(3, 3)
        assert amps == [(7, 1.0)]

    @pytest.mark.parametrize("n", range(1, 13))
    def test_normalized(self, n):
        for k in range(n + 1):
            v = dicke_vector(n, k)
            assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)

    def test_sector_out_of_range(self):
        with pytest.raises(ValueError):
            dicke_amplitudes(3, 4)


class TestProjection:
    def test_uniform_state(self):
        n = 4
        psi = np.full(16, 0.25)
        c, leak = project_symmetric(psi, n)
        np.testing.assert_allclose(
            c.real, [sqrt(comb(n, k) / 2.0**n) for k in range(n + 1)], atol=1e-12)
        assert leak == pytest.approx(0.0, abs=1e-12)

    def test_single_basis_state_leaks_half(self):
        psi = np.zeros(4)
        psi[1] = 1.0  # |01> in qubit-1-first labelling
        c, leak = project_symmetric(psi, 2)
        assert abs(c[1]) == pytest.approx(1 / sqrt(2))
        assert leak == pytest.approx(0.5)

    def test_dimension_checked(self):
        with pytest.raises(ValueError):
            project_symmetric(np.ones(8), 2)


class TestBuildWalk:
    def test_single_qubit(self):
        op = build_symmetric_walk(1, 1.0)
        np.testing.assert_allclose(op.to_dense(), [[0, -1], [-1, 0]])

    def test_hop_palindromic(self):
        op = build_symmetric_walk(7, 0.4)
        np.testing.assert_allclose(op.hop, op.hop[::-1])

    def test_diag_symmetric_iff_potential_is(self):
        sym = build_symmetric_walk(4, 1.0, [1.0, 2.0, 0.0, 2.0, 1.0])
        asym = build_symmetric_walk(4, 1.0, [1.0, 2.0, 0.0, 0.0, 0.0])
        np.testing.assert_allclose(sym.diag, sym.diag[::-1])
        assert not np.allclose(asym.diag, asym.diag[::-1])

    def test_build_time_n1000(self):
        build_symmetric_walk(1000, 1.0)  # warm path
        t0 = time.perf_counter()
        op = build_symmetric_walk(1000, 1.0)
        assert time.perf_counter() - t0 < 0.01
        assert op.diag.shape == (1001,)


class TestSectorEquivalence:
    @pytest.mark.parametrize("n", [4, 8, 10])
    def test_full_vs_sector_evolution(self, n):
        table = spike_potential(n, center=n // 3, height=1.5)
        gamma = 0.7
        M = full_symmetric_hamiltonian(n, gamma, table)
        op = build_symmetric_walk(n, gamma, table)
        psi0 = dicke_vector(n, 0)
        c0 = np.zeros(n + 1)
        c0[0] = 1.0
        times = np.linspace(0.0, 8.0, 100)
        full_states = evolve(M, psi0.astype(complex), times)
        sector_states = evolve(op, c0.astype(complex), times)
        worst = 0.0
        for k in range(len(times)):
            c, leak = project_symmetric(full_states[k], n)
            worst = max(worst, np.abs(c - sector_states[k]).max())
            assert leak < 1e-10
        assert worst < 1e-8

    def test_dicke_closure(self):
        n = 8
        M = full_symmetric_hamiltonian(n, 0.3, plateau_potential(n, 2, 5))
        psi0 = dicke_vector(n, 2).astype(complex)
        times = np.linspace(0.0, 20.0, 50)
        states = evolve(M, psi0, times)
        for k in range(len(times)):
            _, leak = project_symmetric(states[k], n)
            assert leak < 1e-10


class TestEffectiveToSymmetric:
    def test_pure_reduction_when_same_weight_vanishes(self):
        spec = GadgetSpec(n=3, J=1.0, gamma_d=0.01, gamma_a=0.01)
        eff = closed_form_effective(spec)
        no_dense = type(eff)(eff.n, eff.hop_amp, 0.0, eff.diagonal, None)
        op = effective_to_symmetric(no_dense)
        k = np.arange(3, dtype=float)
        np.testing.assert_allclose(op.hop, eff.hop_amp * np.sqrt((k + 1) * (3 - k)))

    def test_full_vs_sector_effective_evolution(self):
        spec = GadgetSpec(n=3, J=1.0, gamma_d=0.01, gamma_a=0.02)
        eff = second_order_numeric(spec)
        op = effective_to_symmetric(eff)
        psi0 = np.full(8, 1 / sqrt(8), dtype=complex)
        c0 = sector_uniform_state(3).astype(complex)
        times = np.linspace(0.0, 3000.0, 40)
        full_states = evolve(eff.matrix(), psi0, times)
        sector_states = evolve(op, c0, times)
        for k in range(len(times)):
            c, _ = project_symmetric(full_states[k], 3)
            assert np.abs(c - sector_states[k]).max() < 1e-10

    def test_equal_gamma_correction_cancels_same_weight_energy(self):
        spec = GadgetSpec(n=4, J=1.0, gamma_d=0.01, gamma_a=0.01,
                          correction_mode="equal_gamma")
        eff = second_order_numeric(spec, include_correction=True)
        op = effective_to_symmetric(eff)
        assert op.diag.max() - op.diag.min() < 1e-5


class TestPotentials:
    def test_search_sector(self):
        f = search_sector_potential(5, 4, -2.0)
        assert f[4] == -2.0 and np.count_nonzero(f) == 1

    def test_spike_shape(self):
        f = spike_potential(8, center=2, height=3.0)
        assert f[2] == pytest.approx(2 + 3.0)
        assert f[3] == pytest.approx(3.0)

    def test_plateau_shape(self):
        f = plateau_potential(8, 2, 5)
        assert f[2] == f[3] == f[4] == f[5] == pytest.approx(2.0)
        assert f[8] == pytest.approx(5.0)

    def test_csv_round_trip(self, tmp_path):
        table = spike_potential(6, 2, 1.25)
        path = tmp_path / "pot.csv"
        save_potential_csv(table, path)
        np.testing.assert_array_equal(load_potential_csv(path), table)

    def test_bad_operator_shapes_rejected(self):
        with pytest.raises(ValueError):
            SymmetricOperator(3, np.zeros(3), np.zeros(3))
