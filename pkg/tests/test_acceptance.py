"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The full sweep fixture runs every (n, J/eta) cell of the convergence study
once per session; later criteria reuse its results.
"""

import sys
import time
from math import pi, sqrt

import numpy as np
import pytest
import scipy.linalg as sla

from symgadget.compiler import (
    MAGIC_ANGLE,
    angular_factor,
    ising_energy,
    qubo_energy,
    qubo_to_ising,
    schedule_error,
    schedule_unitary,
    trotterize,
    zz_to_condphase,
)
from symgadget.dynamics import (
    calibration_for_ratio,
    default_ratio_grid,
    evolve,
    exact_search_reference,
    reference_gamma_opt,
    run_encoded_search,
    reference_run,
    spectral_gap,
    MARKED_SECTOR_SIGN,
)
from symgadget.gadget import (
    GadgetSpec,
    enumerate_manifold,
    verify_single_flip_structure,
    _problem_diagonal,
)
from symgadget.perturbation import (
    closed_form_effective,
    compare_effective,
    fluctuation_table,
    second_order_numeric,
)
from symgadget.spin_model import build_dense, popcount
from symgadget.symmetric_subspace import (
    build_symmetric_walk,
    dicke_vector,
    effective_to_symmetric,
    project_symmetric,
    sector_uniform_state,
    spike_potential,
)


def report(name: str, ok: bool, detail: str = "") -> None:
    line = f"{name}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line, file=sys.__stdout__, flush=True)
    assert ok, line


@pytest.fixture(scope="session")
def full_sweep():
    """All 100 cells of the convergence study: {n: {ratio: (enc, ref)}}."""
    t0 = time.perf_counter()
    cells = {}
    for n in (2, 3, 4, 5, 6):
        cells[n] = {}
        for ratio in default_ratio_grid():
            cal = calibration_for_ratio(n, float(ratio))
            enc = run_encoded_search(n, float(ratio), samples=512, calibration=cal)
            ref = reference_run(cal, samples=512)
            cells[n][float(ratio)] = (enc, ref)
    return cells, time.perf_counter() - t0


def test_a1_manifold_structure():
    t0 = time.perf_counter()
    ok = True
    details = []
    for n in (2, 3, 4, 5, 6):
        entries = enumerate_manifold(GadgetSpec(n=n, J=1.0))
        energies = np.array([e.energy for e in entries])
        ok &= len(entries) == 2**n
        ok &= len({e.data_config for e in entries}) == 2**n
        ok &= all(e.aux_ones == n - e.weight and
                  e.aux_config == "1" * e.aux_ones + "0" * (n - e.aux_ones)
                  for e in entries)
        ok &= float(energies.max() - energies.min()) < 1e-9
    labels = [f"{e.data_config}|{e.aux_config}"
              for e in enumerate_manifold(GadgetSpec(n=2, J=1.0))]
    ok &= labels == ["00|11", "10|10", "01|10", "11|00"]
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 5.0
    report("A1 manifold structure", ok, f"n=2 labels {labels}, {elapsed:.2f}s")


def test_a2_intermediate_gaps():
    t0 = time.perf_counter()
    ok = True
    worst = 0.0
    for n in (2, 3, 4):
        spec = GadgetSpec(n=n, J=1.0)
        rep = verify_single_flip_structure(spec)
        ok &= rep.passed
        worst = max(worst, rep.max_deviation)
        # data-bit flips out of the manifold always cost J or 3J exactly
        diag = _problem_diagonal(spec)
        for e in enumerate_manifold(spec):
            for b in range(n):
                gap = diag[e.basis_index ^ (1 << b)] - e.energy
                dev = min(abs(gap - 1.0), abs(gap - 3.0))
                worst = max(worst, dev)
                ok &= dev < 1e-9
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 5.0
    report("A2 intermediate gaps", ok, f"max deviation {worst:.2e}, {elapsed:.2f}s")


def test_a3_effective_agreement():
    t0 = time.perf_counter()
    gamma = 0.01
    spec = GadgetSpec(n=3, J=1.0, gamma_d=gamma, gamma_a=gamma)
    numeric = second_order_numeric(spec)
    F = fluctuation_table(spec)
    M = numeric.matrix()
    idx = np.arange(8)
    dist = popcount(idx[:, None] ^ idx[None, :])
    w = popcount(idx)
    hop = M[dist == 1]
    same = M[(dist == 2) & (w[:, None] == w[None, :])]
    far = np.abs(M[dist > 2])
    entries = enumerate_manifold(spec)
    diag_expected = np.array([e.energy + F[e.weight] for e in entries])
    ok = np.abs(hop + 4 * gamma * gamma / 3.0).max() < 1e-12
    ok &= np.abs(same + 4 * gamma * gamma / 3.0).max() < 1e-12
    ok &= far.max() < 1e-14
    ok &= np.abs(np.diag(M) - diag_expected).max() < 1e-12

    devs = {}
    for eta in (0.01, 0.02):
        biased = GadgetSpec(n=3, J=1.0, gamma_d=gamma, gamma_a=gamma, eta=eta,
                            bias=(0.0, -1.0, 0.0, 0.0))
        devs[eta] = compare_effective(second_order_numeric(biased),
                                      closed_form_effective(biased)).hop
    ratio = devs[0.02] / devs[0.01]
    ok &= 1.3 <= ratio <= 2.7
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 10.0
    report("A3 effective-Hamiltonian agreement", ok,
           f"hop dev {np.abs(hop + 4e-4 / 3).max():.1e}, "
           f"eta-scaling ratio {ratio:.2f}, {elapsed:.2f}s")


def test_a4_correction_flatness():
    t0 = time.perf_counter()
    gamma = 0.01
    ok = True
    spreads = []
    for n in (3, 4):
        bias = [0.0] * (n + 1)
        bias[1] = MARKED_SECTOR_SIGN
        spec = GadgetSpec(n=n, J=1.0, gamma_d=gamma, gamma_a=gamma, eta=0.01,
                          bias=tuple(bias), correction_mode="equal_gamma")
        eff = second_order_numeric(spec, include_correction=True)
        sec = effective_to_symmetric(eff)
        applied_bias = np.zeros(n + 1)
        applied_bias[n - 1] = 2.0 * spec.eta * MARKED_SECTOR_SIGN
        residual = sec.diag - applied_bias
        spread = float(residual.max() - residual.min())
        spreads.append(spread)
        ok &= spread < 1e-5
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 10.0
    report("A4 correction flatness", ok,
           f"sector spreads {spreads[0]:.2e} (n=3), {spreads[1]:.2e} (n=4), "
           f"{elapsed:.2f}s")


def test_a5_figure_reproduction(full_sweep):
    cells, elapsed = full_sweep
    ok = len(cells) == 5
    details = []
    for n, per_ratio in cells.items():
        ok &= len(per_ratio) == 20
        enc100, ref100 = per_ratio[100.0]
        enc5, ref5 = per_ratio[5.0]
        d100 = abs(enc100.peak_prob - ref100.peak_prob)
        d5 = abs(enc5.peak_prob - ref5.peak_prob)
        ok &= d100 <= 0.02
        ok &= d100 < d5
        ok &= abs(enc100.gap - ref100.gap) <= 0.1 * ref100.gap
        details.append(f"n={n}: {d100:.4f}")
        tau = np.linspace(0.0, 2.0, 512)
        enc50, _ = per_ratio[50.0]
        c50 = np.interp(tau, enc50.scaled_times, enc50.success_prob)
        c100 = np.interp(tau, enc100.scaled_times, enc100.success_prob)
        ok &= float(np.abs(c50 - c100).max()) < 0.05
    ok &= elapsed < 30 * 60
    report("A5 figure reproduction", ok,
           f"|p-p_ref| at J/eta=100: {', '.join(details)}; sweep {elapsed:.0f}s")


def test_a6_sector_equivalence():
    n = 10
    gamma = reference_gamma_opt(n)
    full = exact_search_reference(n, gamma, n - 1, MARKED_SECTOR_SIGN, 1.0, form="full")
    op = exact_search_reference(n, gamma, n - 1, MARKED_SECTOR_SIGN, 1.0)
    delta = spectral_gap(op).delta
    times = np.linspace(0.0, 2 * pi / delta, 100)
    psi0 = np.full(1 << n, 1.0 / sqrt(1 << n), dtype=complex)
    c0 = sector_uniform_state(n).astype(complex)
    full_states = evolve(full, psi0, times)
    sector_states = evolve(op, c0, times)
    worst = 0.0
    for k in range(len(times)):
        c, _ = project_symmetric(full_states[k], n)
        worst = max(worst, float(np.abs(c - sector_states[k]).max()))
    ok = worst < 1e-8

    big = build_symmetric_walk(1000, 0.1, None)
    t0 = time.perf_counter()
    states = evolve(big, sector_uniform_state(1000).astype(complex),
                    np.linspace(0.0, 10.0, 100))
    big_elapsed = time.perf_counter() - t0
    ok &= big_elapsed < 5.0
    ok &= float(np.abs(np.linalg.norm(states, axis=1) - 1.0).max()) < 1e-10
    report("A6 sector equivalence", ok,
           f"n=10 max amplitude dev {worst:.1e}; n=1000 trajectory {big_elapsed:.2f}s")


def test_a7_dicke_closure_and_leakage(full_sweep):
    n = 8
    dim = 1 << n
    w = popcount(np.arange(dim))
    table = spike_potential(n, center=2, height=1.0)
    M = np.diag(table[w])
    rows = np.arange(dim)
    for q in range(n):
        M[rows, rows ^ (1 << q)] = -0.3
    psi0 = dicke_vector(n, 1).astype(complex)
    states = evolve(M, psi0, np.linspace(0.0, 30.0, 60))
    worst_leak = max(project_symmetric(states[k], n)[1] for k in range(60))
    ok = worst_leak < 1e-10

    cells, _ = full_sweep
    enc_eta, _ = cells[4][50.0]     # eta = 0.02
    enc_half, _ = cells[4][100.0]   # eta = 0.01
    ok &= float(enc_half.manifold_leakage.max()) < float(enc_eta.manifold_leakage.max())
    report("A7 Dicke closure and leakage", ok,
           f"closure leak {worst_leak:.1e}; encoded leak "
           f"{enc_eta.manifold_leakage.max():.2e} -> {enc_half.manifold_leakage.max():.2e}")


def test_a8_compiler_fidelity():
    rng = np.random.default_rng(321)
    Z = np.diag([1.0, -1.0])
    ZZ = np.kron(Z, Z)
    worst = 0.0
    for phi in rng.uniform(-2 * np.pi, 2 * np.pi, 32):
        U = schedule_unitary(zz_to_condphase(float(phi), 0, 1))
        diff = U - sla.expm(-1j * phi * ZZ)
        worst = max(worst, float(np.abs(sla.svdvals(diff)).sum()))
    ok = worst <= 1e-12

    from symgadget.gadget import build_gadget, build_transverse
    spec = GadgetSpec(n=2, J=1.0, gamma_d=0.3, gamma_a=0.2)
    H = build_gadget(spec).concat(build_transverse(spec))
    dts = [0.1, 0.05, 0.025, 0.0125]
    errs = [schedule_error(trotterize(H, dt, round(1.0 / dt)), H, 1.0) for dt in dts]
    slope = float(np.polyfit(np.log(dts), np.log(errs), 1)[0])
    ok &= 0.8 <= slope <= 1.2

    Q = np.triu(rng.uniform(-2.0, 2.0, (4, 4)))
    c = rng.uniform(-1.0, 1.0, 4)
    J2, h, off = qubo_to_ising(Q, c)
    qubo_worst = 0.0
    for a in range(16):
        x = [(a >> k) & 1 for k in range(4)]
        z = [1 - 2 * xi for xi in x]
        qubo_worst = max(qubo_worst,
                         abs(qubo_energy(Q, c, x) - ising_energy(J2, h, off, z)))
    ok &= qubo_worst <= 1e-12

    magic = abs(angular_factor(MAGIC_ANGLE))
    ok &= magic < 1e-15
    report("A8 compiler fidelity", ok,
           f"gate dev {worst:.1e}, slope {slope:.3f}, qubo dev {qubo_worst:.1e}, "
           f"magic |f| {magic:.1e}")


def test_a9_determinism_and_unitarity(full_sweep, tmp_path):
    from symgadget.cli import main
    out = tmp_path / "sweep.csv"
    args = ["sweep", "--n", "2", "--n", "3", "--ratio", "10", "--ratio", "55",
            "--samples", "32", "--threads", "2", "--out", str(out)]
    assert main(args) == 0
    first = out.read_bytes()
    out.unlink()
    assert main(args) == 0
    ok = out.read_bytes() == first

    cells, _ = full_sweep
    worst_drift = max(enc.norm_drift for per in cells.values()
                      for enc, _ in per.values())
    ok &= worst_drift < 1e-10
    report("A9 determinism and unitarity", ok,
           f"byte-identical re-run; norm drift {worst_drift:.1e}")
