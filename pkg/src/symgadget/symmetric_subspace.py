"""Hamming-weight sector (Dicke basis) representation of symmetric dynamics.

A permutation-symmetric Hamiltonian over n qubits closes on the n+1 uniform
weight-sector states, so walks that start symmetric reduce to a real
tridiagonal operator: the transverse driver -gamma * sum_i X_i couples
adjacent sectors with matrix element -gamma * sqrt((k+1)(n-k)) (ladder
algebra of the collective spin), and any weight-dependent potential sits on
the diagonal.  This makes reference dynamics cheap at sizes where the full
2^n space is far out of reach.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from math import comb, sqrt
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .perturbation import EffectiveHamiltonian
from .spin_model import popcount


def dicke_amplitudes(n: int, k: int) -> list[tuple[int, float]]:
    """Sparse expansion of the uniform weight-k state: (basis index, amplitude)."""
    if not 0 <= k <= n:
        raise ValueError(f"sector {k} out of range for n = {n}")
    if n > 20:
        raise ValueError("explicit expansion limited to n <= 20")
    amp = 1.0 / sqrt(comb(n, k))
    idx = np.arange(1 << n)
    return [(int(i), amp) for i in idx[popcount(idx) == k]]


def dicke_vector(n: int, k: int) -> np.ndarray:
    """Dense 2^n vector of the uniform weight-k state."""
    psi = np.zeros(1 << n)
    for i, a in dicke_amplitudes(n, k):
        psi[i] = a
    return psi


def project_symmetric(psi: np.ndarray, n: int) -> tuple[np.ndarray, float]:
    """Sector amplitudes c[k] = <D_{n,k}|psi> and the weight 1 - sum |c|^2."""
    psi = np.asarray(psi)
    if psi.shape != (1 << n,):
        raise ValueError(f"state dimension {psi.shape} does not match 2^{n}")
    w = popcount(np.arange(1 << n))
    c = np.zeros(n + 1, dtype=complex)
    for k in range(n + 1):
        c[k] = psi[w == k].sum() / sqrt(comb(n, k))
    leakage = float(1.0 - (np.abs(c) ** 2).sum() / (np.abs(psi) ** 2).sum())
    return c, leakage


@dataclass(frozen=True)
class SymmetricOperator:
    """Real symmetric tridiagonal operator over weight sectors 0..n."""

    n: int
    diag: np.ndarray
    hop: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "diag", np.asarray(self.diag, dtype=float))
        object.__setattr__(self, "hop", np.asarray(self.hop, dtype=float))
        if self.diag.shape != (self.n + 1,) or self.hop.shape != (self.n,):
            raise ValueError("sector operator needs n+1 diagonal and n hop entries")

    def to_dense(self) -> np.ndarray:
        return (np.diag(self.diag) + np.diag(self.hop, 1) + np.diag(self.hop, -1))


def sector_hop(n: int, gamma: float) -> np.ndarray:
    """Couplings of -gamma * sum_i X_i between adjacent sectors."""
    k = np.arange(n, dtype=float)
    return -gamma * np.sqrt((k + 1.0) * (n - k))


# -- potential families --------------------------------------------------------

def resolve_potential(n: int, potential) -> np.ndarray:
    """Accept a table, a callable f(k), or None (flat) and return f[0..n]."""
    if potential is None:
        return np.zeros(n + 1)
    if callable(potential):
        return np.array([float(potential(k)) for k in range(n + 1)])
    table = np.asarray(potential, dtype=float)
    if table.shape != (n + 1,):
        raise ValueError(f"potential table needs {n + 1} entries, got {table.shape}")
    return table


def search_sector_potential(n: int, k_star: int, strength: float) -> np.ndarray:
    """Single shifted sector (the walk-search marker)."""
    if not 0 <= k_star <= n:
        raise ValueError(f"marked sector {k_star} out of range")
    f = np.zeros(n + 1)
    f[k_star] = strength
    return f


def spike_potential(n: int, center: int, height: float, width: int = 1,
                    slope: float = 1.0) -> np.ndarray:
    """Linear ramp with a rectangular barrier of the given height and width."""
    k = np.arange(n + 1, dtype=float)
    f = slope * k
    f[np.abs(k - center) <= (width - 1) / 2] += height
    return f


def plateau_potential(n: int, start: int, stop: int, slope: float = 1.0) -> np.ndarray:
    """Linear ramp flattened between the two sector indices."""
    if not 0 <= start <= stop <= n:
        raise ValueError("plateau bounds out of order")
    k = np.arange(n + 1, dtype=float)
    f = slope * k
    f[(k >= start) & (k <= stop)] = slope * start
    f[k > stop] = slope * (k[k > stop] - (stop - start))
    return f


def load_potential_csv(path: str | Path) -> np.ndarray:
    """Read a (k, f[k]) table; rows may appear in any order but must be complete."""
    rows = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() == "k":
                continue
            rows[int(row[0])] = float(row[1])
    n = max(rows)
    if sorted(rows) != list(range(n + 1)):
        raise ValueError(f"potential table in {path} has gaps")
    return np.array([rows[k] for k in range(n + 1)])


def save_potential_csv(table: Sequence[float], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "f"])
        for k, v in enumerate(table):
            writer.writerow([k, repr(float(v))])


# -- builders -------------------------------------------------------------------

def build_symmetric_walk(n: int, gamma: float, potential=None) -> SymmetricOperator:
    """Sector reduction of -gamma * sum X_i plus a weight potential."""
    if n < 1:
        raise ValueError("need n >= 1")
    return SymmetricOperator(n, resolve_potential(n, potential), sector_hop(n, gamma))


def effective_to_symmetric(eff: EffectiveHamiltonian,
                           bias=None) -> SymmetricOperator:
    """Project an effective Hamiltonian onto the weight sectors.

    With a dense matrix attached this is the exact Dicke-state sandwich (the
    weight-preserving hops then contribute their uniform-state energy
    same_weight_amp * k(n-k) automatically); otherwise the closed-form fields
    are used.  ``bias`` adds an extra sector table to the diagonal.
    """
    n = eff.n
    k = np.arange(n + 1, dtype=float)
    if eff.dense is not None:
        M = eff.matrix()
        w = popcount(np.arange(1 << n))
        vecs = np.zeros((n + 1, 1 << n))
        for kk in range(n + 1):
            sel = w == kk
            vecs[kk, sel] = 1.0 / sqrt(comb(n, kk))
        S = vecs @ M @ vecs.T
        diag = np.diag(S).copy()
        hop = np.diag(S, 1).copy()
    else:
        diag = np.array([float(np.mean(eff.diagonal[popcount(np.arange(1 << n)) == kk]))
                         for kk in range(n + 1)])
        diag = diag + eff.same_weight_amp * k * (n - k)
        hop = eff.hop_amp * np.sqrt((k[:-1] + 1.0) * (n - k[:-1]))
    if bias is not None:
        diag = diag + resolve_potential(n, bias)
    return SymmetricOperator(n, diag, hop)


def sector_uniform_state(n: int) -> np.ndarray:
    """Sector amplitudes of the uniform superposition over all 2^n states."""
    return np.array([sqrt(comb(n, k) / 2.0**n) for k in range(n + 1)])
