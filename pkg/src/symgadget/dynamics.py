"""Time evolution, spectral gaps, and the encoded walk-search experiments.

Two propagation paths are provided and cross-checked: a dense
eigendecomposition path (one factorization per Hamiltonian, then analytic
evolution over arbitrary time grids) for dimensions up to a configurable
limit, and a matrix-free short-iterative Lanczos propagator for anything
larger.  Sector operators evolve through their tridiagonal eigensystem.

The search experiment drives a gadget whose bias lowers one weight sector.
Calibration follows the validation recipe: with gamma the optimal unencoded
hop rate, set J = gamma', gamma_d = gamma_a = eta * gamma', q0 = gamma'/2,
where gamma' = sqrt(3 gamma) / (2 eta) solves the self-consistency
gamma' = gamma sqrt(n) / |<D_{n,0}|H_eff|D_{n,1}>|.  That choice pins the
dimensionless marker-to-hop ratio of the encoded effective walk to a value
independent of eta, so shrinking eta (raising J/eta) changes only the
perturbative quality.  The exact reference Hamiltonian marks the same weight
class with the same sign, with hop and marker matched to the encoded
effective scales (hop 4 gamma_d gamma_a / 3J, marker 2 eta), which makes the
peak-probability comparison well-posed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import pi, sqrt
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar

from . import perturbation
from .gadget import GadgetSpec, enumerate_manifold, assemble_total, sector_bias_map
from .spin_model import IsingXZHamiltonian, apply, build_dense, popcount
from .symmetric_subspace import (
    SymmetricOperator,
    build_symmetric_walk,
    search_sector_potential,
    sector_uniform_state,
)

#: dense eigendecomposition is the default up to this dimension
DENSE_EVOLVE_LIMIT = 1 << 12
#: hard ceiling for any dense path
DENSE_HARD_LIMIT = 1 << 16
#: dense full-spectrum gap computations stop here
DENSE_GAP_LIMIT = 1 << 13

# A positive bias-table entry raises its sector by twice its value; the search
# lowers the marked class so the walk amplifies from the uniform start, so the
# unit search bias is negative and the reference marker carries the same sign.
MARKED_SECTOR_SIGN = -1.0


class KrylovConvergenceError(RuntimeError):
    """The Lanczos propagator could not reach the requested tolerance."""


class CalibrationError(RuntimeError):
    """The hop-rate optimizer failed to bracket an interior optimum."""


class GapResult(NamedTuple):
    delta: float
    ground_degenerate: bool
    e0: float


@dataclass(frozen=True)
class EvolutionResult:
    """Success-probability trace of one walk run.

    ``peak_prob`` follows the peak-time convention t = pi/gap; the curve's
    sampled maximum is kept alongside since the exact dynamics peaks slightly
    past pi/gap for a marked class.
    """

    times: np.ndarray
    success_prob: np.ndarray
    manifold_leakage: np.ndarray
    gap: float
    peak_prob: float
    peak_time: float
    max_prob: float = 0.0
    max_time: float = 0.0
    norm_drift: float = 0.0

    @property
    def scaled_times(self) -> np.ndarray:
        return self.times * self.gap / pi


@dataclass(frozen=True)
class WalkCalibration:
    """Parameter set tying one encoded search run to the unencoded walk."""

    n: int
    gamma_opt: float
    gamma_prime: float
    eta: float

    @property
    def J(self) -> float:
        return self.gamma_prime

    @property
    def gamma_d(self) -> float:
        return self.eta * self.gamma_prime

    @property
    def gamma_a(self) -> float:
        return self.eta * self.gamma_prime

    @property
    def q0(self) -> float:
        return 0.5 * self.gamma_prime

    @property
    def ratio(self) -> float:
        """Sweep axis J/(eta J) in units of J, i.e. 1/eta."""
        return 1.0 / self.eta

    @property
    def effective_hop(self) -> float:
        """Hop scale of the encoded effective walk, 4 gamma_d gamma_a / (3J)."""
        return 4.0 * self.gamma_d * self.gamma_a / (3.0 * self.J)

    @property
    def marker_shift(self) -> float:
        """Energy shift of the marked sector produced by the unit bias."""
        return 2.0 * self.eta


# -- eigensystems ---------------------------------------------------------------

def _eigensystem(H) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(H, SymmetricOperator):
        return sla.eigh_tridiagonal(H.diag, H.hop)
    if isinstance(H, IsingXZHamiltonian):
        if H.dim > DENSE_HARD_LIMIT:
            raise ValueError(f"dimension {H.dim} too large for the dense path")
        return sla.eigh(build_dense(H))
    M = np.asarray(H)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    return sla.eigh(M)


def _eigenvalues(H) -> np.ndarray:
    if isinstance(H, SymmetricOperator):
        return sla.eigvalsh_tridiagonal(H.diag, H.hop)
    if isinstance(H, IsingXZHamiltonian):
        if H.dim > DENSE_GAP_LIMIT:
            raise ValueError(f"dimension {H.dim} exceeds the dense gap limit")
        return np.linalg.eigvalsh(build_dense(H))
    return np.linalg.eigvalsh(np.asarray(H))


def spectral_gap(H, degeneracy_tol: float = 1e-12) -> GapResult:
    """Gap between the ground level and the first strictly higher level."""
    w = _eigenvalues(H)
    e0 = float(w[0])
    above = np.nonzero(w - e0 > degeneracy_tol)[0]
    if above.size == 0:
        raise ValueError("spectrum is fully degenerate; no gap")
    k = int(above[0])
    return GapResult(float(w[k] - e0), k > 1, e0)


def spectral_gap_from_eigenvalues(w: np.ndarray, degeneracy_tol: float = 1e-12) -> float:
    e0 = w[0]
    above = np.nonzero(w - e0 > degeneracy_tol)[0]
    if above.size == 0:
        raise ValueError("spectrum is fully degenerate; no gap")
    return float(w[int(above[0])] - e0)


def supported_gap(w: np.ndarray, coeff: np.ndarray, weight_tol: float = 1e-6,
                  degeneracy_tol: float = 1e-12) -> float:
    """Gap between the two lowest distinct levels the state actually populates.

    Walk dynamics from a symmetric start never touch eigenstates of other
    symmetry sectors, so the time scale of the evolution is set by the gap
    within the populated part of the spectrum, not by spectator levels.  The
    weight cutoff (relative to the dominant level) drops states whose
    population could never register on a probability trace.
    """
    weights = np.abs(coeff) ** 2
    supported = w[weights > weight_tol * weights.max()]
    if supported.size < 2:
        raise ValueError("initial state populates fewer than two levels")
    return spectral_gap_from_eigenvalues(np.sort(supported), degeneracy_tol)


# -- propagation ----------------------------------------------------------------

def _evolve_eigh(w: np.ndarray, V: np.ndarray, psi0: np.ndarray,
                 times: np.ndarray) -> np.ndarray:
    coeff = V.conj().T @ psi0
    phases = np.exp(-1j * np.outer(times, w))
    return (phases * coeff[None, :]) @ V.T


def _lanczos_step(H: IsingXZHamiltonian, psi: np.ndarray, dt: float,
                  tol: float, m_max: int) -> tuple[np.ndarray, bool]:
    """One Krylov step of exp(-i dt H) psi with full reorthogonalization."""
    beta0 = np.linalg.norm(psi)
    if beta0 == 0.0:
        return psi, True
    V = [psi / beta0]
    alphas: list[float] = []
    betas: list[float] = []
    for j in range(m_max):
        w = apply(H, V[j]).astype(complex)
        alphas.append(float(np.vdot(V[j], w).real))
        w -= alphas[j] * V[j]
        if j > 0:
            w -= betas[j - 1] * V[j - 1]
        for v in V:  # reorthogonalize; subspaces here are small
            w -= np.vdot(v, w) * v
        beta = np.linalg.norm(w)
        if j >= 1 or beta < tol:
            ew, eV = sla.eigh_tridiagonal(np.array(alphas), np.array(betas))
            u = eV @ (np.exp(-1j * dt * ew) * eV[0, :].conj())
            err = beta * abs(dt) * abs(u[-1])
            if err < tol or beta < 1e-14:
                out = beta0 * (np.stack(V, axis=1) @ u)
                return out, True
        betas.append(float(beta))
        V.append(w / beta)
    return psi, False


def _evolve_krylov(H: IsingXZHamiltonian, psi0: np.ndarray, times: np.ndarray,
                   tol: float, m_max: int = 48, max_splits: int = 12) -> np.ndarray:
    psi = psi0.astype(complex)
    states = np.empty((len(times), psi.size), dtype=complex)
    t_now = 0.0
    for k, t in enumerate(times):
        dt = float(t) - t_now
        if dt != 0.0:
            pieces = 1
            for _ in range(max_splits):
                ok = True
                trial = psi
                for _ in range(pieces):
                    trial, ok = _lanczos_step(H, trial, dt / pieces, tol / max(1, pieces), m_max)
                    if not ok:
                        break
                if ok:
                    psi = trial
                    break
                pieces *= 2
            else:
                raise KrylovConvergenceError(
                    f"no convergence for step {dt} at tolerance {tol}")
        t_now = float(t)
        states[k] = psi
    return states


def evolve(H, psi0: np.ndarray, times: Sequence[float], method: str = "auto",
           dense_limit: int = DENSE_EVOLVE_LIMIT, krylov_tol: float = 1e-10) -> np.ndarray:
    """States exp(-i H t) psi0 on an ascending time grid, one row per time."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(np.diff(times) < 0):
        raise ValueError("time grid must be one-dimensional and ascending")
    psi0 = np.asarray(psi0, dtype=complex)
    dim = H.dim if isinstance(H, IsingXZHamiltonian) else (
        H.n + 1 if isinstance(H, SymmetricOperator) else np.asarray(H).shape[0])
    if psi0.shape != (dim,):
        raise ValueError(f"initial state dimension {psi0.shape} does not match {dim}")
    if method == "auto":
        if isinstance(H, IsingXZHamiltonian) and dim > dense_limit:
            method = "krylov"
        else:
            method = "dense"
    if method == "dense":
        w, V = _eigensystem(H)
        return _evolve_eigh(w, V, psi0, times)
    if method == "krylov":
        if not isinstance(H, IsingXZHamiltonian):
            raise ValueError("the Krylov path needs a matrix-free Hamiltonian")
        return _evolve_krylov(H, psi0, times, krylov_tol)
    raise ValueError(f"unknown method {method!r}")


# -- calibration ----------------------------------------------------------------

def _sector_success_curve(op: SymmetricOperator, c0: np.ndarray, times: np.ndarray,
                          sector: int) -> np.ndarray:
    w, V = sla.eigh_tridiagonal(op.diag, op.hop)
    coeff = V.T @ c0
    amps = (np.exp(-1j * np.outer(times, w)) * coeff[None, :]) @ V[sector, :]
    return np.abs(amps) ** 2


def _reference_peak(n: int, gamma: float, marked_weight: int, marker: float) -> float:
    """Success probability at t = pi/gap, the peak-time convention used throughout."""
    op = build_symmetric_walk(n, gamma, search_sector_potential(n, marked_weight, marker))
    delta = spectral_gap(op).delta
    t_peak = np.array([pi / delta])
    return float(_sector_success_curve(op, sector_uniform_state(n), t_peak, marked_weight)[0])


@lru_cache(maxsize=None)
def reference_gamma_opt(n: int, marked_weight: int | None = None,
                        bracket: tuple[float, float] = (0.02, 3.0)) -> float:
    """Hop rate maximizing the unencoded walk's peak success probability.

    Defaults to the single marked vertex (the all-ones weight class), the
    standard hypercube-search calibration; the optimum decreases with n.
    """
    if n < 2:
        raise ValueError("calibration needs n >= 2")
    if marked_weight is None:
        marked_weight = n
    lo, hi = bracket
    res = minimize_scalar(
        lambda g: -_reference_peak(n, g, marked_weight, MARKED_SECTOR_SIGN),
        bounds=(lo, hi), method="bounded", options={"xatol": 1e-6},
    )
    gamma = float(res.x)
    if not res.success or gamma < lo + 1e-3 or gamma > hi - 1e-3:
        raise CalibrationError(f"no interior optimum in ({lo}, {hi}) for n = {n}")
    return gamma


def calibrate(n: int, eta: float) -> WalkCalibration:
    """Validation parameter set at the given bias scale."""
    if not 0.0 < eta <= 0.2:
        raise ValueError("eta must lie in (0, 0.2]")
    gamma = reference_gamma_opt(n)
    gamma_prime = sqrt(3.0 * gamma) / (2.0 * eta)
    return WalkCalibration(n, gamma, gamma_prime, eta)


def calibration_for_ratio(n: int, ratio: float) -> WalkCalibration:
    """Calibration at a prescribed ratio J/(eta J) = 1/eta.

    The sweep axis measures the coupling against the bias-field scale eta*J
    in units of J (equivalently J over the transverse strength, since the
    validation relation sets gamma_d = eta*J), so a ratio of R selects
    eta = 1/R.
    """
    if ratio <= 0:
        raise ValueError("J/eta must be positive")
    gamma = reference_gamma_opt(n)
    eta = 1.0 / ratio
    return WalkCalibration(n, gamma, sqrt(3.0 * gamma) / (2.0 * eta), eta)


def search_gadget_spec(cal: WalkCalibration) -> GadgetSpec:
    """Gadget realizing the search bias (signed unit entry in bias slot 1)."""
    bias = [0.0] * (cal.n + 1)
    bias[1] = MARKED_SECTOR_SIGN
    return GadgetSpec(
        n=cal.n, J=cal.J, q0=cal.q0, eta=cal.eta,
        gamma_d=cal.gamma_d, gamma_a=cal.gamma_a,
        bias=tuple(bias), correction_mode="equal_gamma",
    )


def marked_weight_for(cal: WalkCalibration) -> int:
    """Weight class shifted by the search bias (empirical map, slot 1)."""
    probe = sector_bias_map(GadgetSpec(n=cal.n, J=cal.J, q0=cal.q0))
    return probe.weight_for_index[1]


def exact_search_reference(n: int, gamma: float, marked_weight: int,
                           sign: float = MARKED_SECTOR_SIGN, marker: float = 1.0,
                           form: str = "sector"):
    """Reference search Hamiltonian -gamma sum X_i + sign*marker on the class."""
    if form == "sector":
        return build_symmetric_walk(
            n, gamma, search_sector_potential(n, marked_weight, sign * marker))
    if form == "full":
        dim = 1 << n
        w = popcount(np.arange(dim))
        M = np.diag(np.where(w == marked_weight, sign * marker, 0.0))
        rows = np.arange(dim)
        for q in range(n):
            M[rows, rows ^ (1 << q)] = -gamma
        return M
    raise ValueError(f"unknown form {form!r}")


def reference_run(cal: WalkCalibration, samples: int = 512,
                  marked_weight: int | None = None) -> EvolutionResult:
    """Sector-space run of the scale-matched exact reference."""
    if marked_weight is None:
        marked_weight = cal.n - 1
    op = exact_search_reference(cal.n, cal.effective_hop, marked_weight,
                                MARKED_SECTOR_SIGN, cal.marker_shift)
    c0 = sector_uniform_state(cal.n)
    ww, VV = sla.eigh_tridiagonal(op.diag, op.hop)
    delta = supported_gap(ww, VV.T @ c0)
    times = np.linspace(0.0, 2.0 * pi / delta, samples)
    probs = _sector_success_curve(op, c0, times, marked_weight)
    peak = float(_sector_success_curve(op, c0, np.array([pi / delta]), marked_weight)[0])
    k_max = int(np.argmax(probs))
    return EvolutionResult(
        times=times, success_prob=probs,
        manifold_leakage=np.zeros_like(probs),
        gap=delta, peak_prob=peak, peak_time=pi / delta,
        max_prob=float(probs[k_max]), max_time=float(times[k_max]),
    )


# -- encoded runs ----------------------------------------------------------------

def run_encoded_search(n: int, J_over_eta: float, samples: int = 512,
                       calibration: WalkCalibration | None = None) -> EvolutionResult:
    """Full encoded walk: gadget + driver + corrections + search bias.

    Starts from the uniform superposition over the low-energy manifold,
    evolves over [0, 2 pi / gap], and reports the population of the marked
    manifold sector (marked data configurations with their matching
    auxiliary configurations).
    """
    if not 2 <= n <= 6:
        raise ValueError("encoded runs use the dense path; need 2 <= n <= 6")
    if samples < 2:
        raise ValueError("need at least two samples")
    cal = calibration if calibration is not None else calibration_for_ratio(n, J_over_eta)
    spec = search_gadget_spec(cal)
    F = perturbation.fluctuation_table(spec)
    H = assemble_total(spec, F)
    entries = enumerate_manifold(spec)
    man = np.array([e.basis_index for e in entries], dtype=np.int64)
    marked_weight = marked_weight_for(cal)
    marked_rows = np.array([i for i, e in enumerate(entries) if e.weight == marked_weight])

    w, V = _eigensystem(H)
    psi0 = np.zeros(H.dim)
    psi0[man] = 1.0 / sqrt(man.size)
    coeff = V.T @ psi0
    delta = supported_gap(w, coeff)

    times = np.linspace(0.0, 2.0 * pi / delta, samples)
    t_all = np.append(times, pi / delta)
    phases = np.exp(-1j * np.outer(t_all, w)) * coeff[None, :]
    man_amps = phases @ V[man, :].T          # (times, manifold states)
    norms = np.sqrt((np.abs(phases) ** 2).sum(axis=1))

    man_pop = (np.abs(man_amps) ** 2)
    success = man_pop[:, marked_rows].sum(axis=1)
    leakage = 1.0 - man_pop.sum(axis=1)
    k_max = int(np.argmax(success[:-1]))
    return EvolutionResult(
        times=times,
        success_prob=success[:-1],
        manifold_leakage=leakage[:-1],
        gap=delta,
        peak_prob=float(success[-1]),
        peak_time=pi / delta,
        max_prob=float(success[k_max]),
        max_time=float(times[k_max]),
        norm_drift=float(np.abs(norms - 1.0).max()),
    )


@dataclass(frozen=True)
class SweepRow:
    n: int
    J_over_eta: float
    p_peak: float
    p_reference: float
    gap: float
    error: str = ""


def default_ratio_grid(count: int = 20, lo: float = 5.0, hi: float = 100.0) -> np.ndarray:
    return np.linspace(lo, hi, count)


def sweep_cells(n_list: Sequence[int], ratio_list: Sequence[float],
                samples: int = 512
                ) -> list[tuple[int, float, EvolutionResult, EvolutionResult]]:
    """Run every (n, J/eta) cell; deterministic (n, ratio) order."""
    cells = []
    for n in sorted(set(int(n) for n in n_list)):
        for ratio in sorted(set(float(r) for r in ratio_list)):
            cal = calibration_for_ratio(n, ratio)
            enc = run_encoded_search(n, ratio, samples=samples, calibration=cal)
            ref = reference_run(cal, samples=samples)
            cells.append((n, ratio, enc, ref))
    return cells


def sweep_peak(n_list: Sequence[int], ratio_list: Sequence[float],
               samples: int = 512) -> list[SweepRow]:
    """Peak-probability table over (n, J/eta) cells, deterministic order."""
    return [SweepRow(n, ratio, enc.peak_prob, ref.peak_prob, enc.gap)
            for n, ratio, enc, ref in sweep_cells(n_list, ratio_list, samples)]
