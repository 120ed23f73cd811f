"""Second-order effective dynamics of the driven gadget, numeric and closed form.

Within the low-energy manifold the transverse driver acts only through pairs
of single-qubit flips.  Summing over the single-flip intermediates gives the
numeric effective matrix

    M[r][s] = sum_q <r|H_t|q><q|H_t|s> * (1/(E_r - E_q) + 1/(E_s - E_q)) / 2
              + E_r * delta_{rs}

(the denominator is symmetrized so M is exactly Hermitian; the two variants
coincide on the degenerate manifold and differ by O(eta) otherwise).  The
closed form predicts hop entries -4 gamma_d gamma_a / (3J) between manifold
states at logical distance 1, entries -4 gamma_d^2 / (3J) between same-weight
states at logical distance 2, and the diagonal E_r + F[|r|] with F the
fluctuation table, all entries exact at eta = 0 and correct to O(gamma^2 eta).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .gadget import GadgetSpec, _problem_diagonal, manifold_indices, _staircase_aux
from .spin_model import logical_hamming_distance, logical_hamming_weight, popcount

#: denominators closer to the manifold than this (in units of J) are degenerate
_DENOMINATOR_FLOOR = 1e-9


class DegenerateIntermediateError(RuntimeError):
    """An intermediate state is degenerate with the manifold."""


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """Logical-space operator over the 2^n manifold states.

    Rows and columns are indexed by the data configuration (0 .. 2^n - 1);
    ``diagonal[r]`` includes the classical energy E_r.  ``dense`` is kept for
    the numeric variant and for small closed-form instances.
    """

    n: int
    hop_amp: float
    same_weight_amp: float
    diagonal: np.ndarray
    dense: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return 1 << self.n

    def matrix(self) -> np.ndarray:
        if self.dense is None:
            raise ValueError("no dense matrix attached")
        return self.dense


def _flip_energy_cost(spec: GadgetSpec, diag: np.ndarray, index: int, bit: int) -> float:
    return float(diag[index ^ (1 << bit)] - diag[index])


def _transverse_coupling(spec: GadgetSpec, bit: int) -> float:
    """<r|H_trans|r XOR bit>: -gamma_d on data bits, -gamma_a on auxiliaries."""
    return -spec.gamma_d if bit < spec.n else -spec.gamma_a


def fluctuation_table(spec: GadgetSpec) -> np.ndarray:
    """Second-order self-energies F[k], one per logical-weight sector.

    Evaluated at the representative with the first k data qubits in |1>
    (every same-weight state gives the same value; the tests check this).
    """
    spec.validate()
    n = spec.n
    diag = _problem_diagonal(spec)
    F = np.zeros(n + 1)
    for k in range(n + 1):
        rep = ((1 << k) - 1) | (_staircase_aux(n - k) << n)
        for bit in range(2 * n):
            g = _transverse_coupling(spec, bit)
            if g == 0.0:
                continue
            denom = -_flip_energy_cost(spec, diag, rep, bit)
            if abs(denom) < _DENOMINATOR_FLOOR * spec.J:
                raise DegenerateIntermediateError(
                    f"intermediate degenerate with manifold at sector {k}, bit {bit}")
            F[k] += g * g / denom
    return F


def second_order_numeric(spec: GadgetSpec,
                         include_correction: bool = False) -> EffectiveHamiltonian:
    """Effective matrix evaluated directly from the definition (dense variant).

    With ``include_correction`` the spec's correction fields (built from this
    spec's own fluctuation table) join the diagonal problem Hamiltonian, so
    the result describes the corrected system.
    """
    spec.validate()
    if spec.n > 6:
        raise ValueError("numeric effective Hamiltonian limited to n <= 6")
    n = spec.n
    layout = spec.layout
    correction = None
    if include_correction and spec.correction_mode != "none":
        from .gadget import build_correction
        correction = build_correction(spec, fluctuation_table(spec))
    diag = _problem_diagonal(spec, correction)
    man = manifold_indices(spec)
    row_of = {int(idx): r for r, idx in enumerate(man)}
    dim = 1 << n
    M = np.zeros((dim, dim))
    for r, r_idx in enumerate(map(int, man)):
        E_r = diag[r_idx]
        for b1 in range(2 * n):
            g1 = _transverse_coupling(spec, b1)
            if g1 == 0.0:
                continue
            q_idx = r_idx ^ (1 << b1)
            E_q = diag[q_idx]
            if abs(E_r - E_q) < _DENOMINATOR_FLOOR * spec.J:
                raise DegenerateIntermediateError(
                    f"intermediate {layout.label(q_idx)} degenerate with manifold")
            for b2 in range(2 * n):
                g2 = _transverse_coupling(spec, b2)
                if g2 == 0.0:
                    continue
                s = row_of.get(q_idx ^ (1 << b2))
                if s is None:
                    continue
                E_s = diag[man[s]]
                M[r, s] += g1 * g2 * 0.5 * (1.0 / (E_r - E_q) + 1.0 / (E_s - E_q))
        M[r, r] += E_r
    hop, same = _case_amplitudes(spec, M)
    return EffectiveHamiltonian(n, hop, same, np.diag(M).copy(), M)


def _case_classes(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Boolean masks (hop, same_weight, other off-diagonal) over data configs."""
    dim = 1 << n
    idx = np.arange(dim)
    dist = popcount(idx[:, None] ^ idx[None, :])
    w = popcount(idx)
    dw = w[:, None] - w[None, :]
    hop = dist == 1
    same = (dist == 2) & (dw == 0)
    off = ~np.eye(dim, dtype=bool)
    other = off & ~hop & ~same
    return hop, same, other


def _case_amplitudes(spec: GadgetSpec, M: np.ndarray) -> tuple[float, float]:
    hop, same, _ = _case_classes(spec.n)
    hop_amp = float(M[hop].mean()) if hop.any() else closed_hop_amplitude(spec)
    same_amp = float(M[same].mean()) if same.any() else closed_same_weight_amplitude(spec)
    return hop_amp, same_amp


def closed_hop_amplitude(spec: GadgetSpec) -> float:
    return -4.0 * spec.gamma_d * spec.gamma_a / (3.0 * spec.J)


def closed_same_weight_amplitude(spec: GadgetSpec) -> float:
    return -4.0 * spec.gamma_d**2 / (3.0 * spec.J)


def closed_form_effective(spec: GadgetSpec,
                          fluctuations: np.ndarray | None = None) -> EffectiveHamiltonian:
    """Case-table prediction for the effective matrix."""
    spec.validate()
    if fluctuations is None:
        fluctuations = fluctuation_table(spec)
    F = np.asarray(fluctuations, dtype=float)
    n = spec.n
    dim = 1 << n
    diag_full = _problem_diagonal(spec)
    man = manifold_indices(spec)
    w = popcount(np.arange(dim))
    diagonal = diag_full[man] + F[w]
    hop_amp = closed_hop_amplitude(spec)
    same_amp = closed_same_weight_amplitude(spec)
    dense = None
    if n <= 10:
        hop, same, _ = _case_classes(n)
        dense = hop_amp * hop + same_amp * same + np.diag(diagonal)
    return EffectiveHamiltonian(n, hop_amp, same_amp, diagonal, dense)


@dataclass(frozen=True)
class DeviationReport:
    """Entrywise numeric-vs-closed-form deviations split by case class."""

    n: int
    hop: float
    same_weight: float
    diagonal: float
    zero_class: float

    @property
    def overall(self) -> float:
        return max(self.hop, self.same_weight, self.diagonal, self.zero_class)


def compare_effective(numeric: EffectiveHamiltonian,
                      closed: EffectiveHamiltonian) -> DeviationReport:
    if numeric.n != closed.n:
        raise ValueError("effective Hamiltonians have different sizes")
    A = numeric.matrix()
    B = closed.matrix()
    D = np.abs(A - B)
    hop, same, other = _case_classes(numeric.n)
    return DeviationReport(
        n=numeric.n,
        hop=float(D[hop].max()) if hop.any() else 0.0,
        same_weight=float(D[same].max()) if same.any() else 0.0,
        diagonal=float(np.abs(np.diag(A) - np.diag(B)).max()),
        zero_class=float(D[other].max()) if other.any() else 0.0,
    )


# -- serialization ------------------------------------------------------------

def effective_to_dict(eff: EffectiveHamiltonian,
                      fluctuations: np.ndarray | None = None) -> dict:
    n = eff.n
    w = popcount(np.arange(1 << n))
    diag_by_weight = [float(np.mean(eff.diagonal[w == k])) for k in range(n + 1)]
    doc = {
        "n": n,
        "hop_amp": eff.hop_amp,
        "same_weight_amp": eff.same_weight_amp,
        "diagonal_by_weight": diag_by_weight,
        "diagonal": [float(x) for x in eff.diagonal],
    }
    if fluctuations is not None:
        doc["F"] = [float(x) for x in fluctuations]
    return doc


def dump_effective(eff: EffectiveHamiltonian, path: str | Path,
                   dense_path: str | Path | None = None,
                   fluctuations: np.ndarray | None = None) -> None:
    """Write the JSON summary; optionally the dense matrix as raw float64."""
    doc = effective_to_dict(eff, fluctuations)
    if dense_path is not None:
        if eff.dense is None:
            raise ValueError("no dense matrix to dump")
        dense_path = Path(dense_path)
        dense_path.write_bytes(np.ascontiguousarray(eff.dense, dtype=np.float64).tobytes())
        doc["dense"] = {
            "file": dense_path.name,
            "dtype": "float64",
            "shape": [eff.dim, eff.dim],
            "order": "C",
        }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_effective(path: str | Path) -> EffectiveHamiltonian:
    path = Path(path)
    doc = json.loads(path.read_text())
    dense = None
    if "dense" in doc:
        meta = doc["dense"]
        raw = (path.parent / meta["file"]).read_bytes()
        dense = np.frombuffer(raw, dtype=meta["dtype"]).reshape(meta["shape"]).copy()
    return EffectiveHamiltonian(
        n=int(doc["n"]),
        hop_amp=float(doc["hop_amp"]),
        same_weight_amp=float(doc["same_weight_amp"]),
        diagonal=np.array(doc["diagonal"], dtype=float),
        dense=dense,
    )
