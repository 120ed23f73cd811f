"""Qubit layouts and 1/2-body Ising-XZ Hamiltonians with matrix-free action.

Conventions used across the package:

* Z|0> = +|0>, Z|1> = -|1>.  A computational basis state is an integer whose
  bit q holds the state of qubit q.
* Data qubits occupy the low-order bits 0 .. n_data-1; auxiliary qubit i
  (1-based) maps to bit n_data + i - 1.
* Basis labels print as "d...d|a...a" with qubit 1 leftmost in each register.

The canonical Hamiltonian form is a term list (one-body Z, two-body ZZ,
one-body X); dense matrices are derived views so that 16-qubit systems stay
feasible matrix-free.  Coefficients are plain energies in whatever unit the
caller works in (the gadget builders use the data coupling J as that unit).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import isfinite
from typing import Iterable, Sequence

import numpy as np

Z1 = "Z1"
Z2 = "Z2"
X1 = "X1"
AXES = (Z1, Z2, X1)

#: largest dimension for which build_dense will materialize a matrix
DEFAULT_DENSE_LIMIT = 1 << 16


def popcount(values):
    """Number of set bits, elementwise for arrays, plain int for scalars."""
    if isinstance(values, (int, np.integer)):
        return int(values).bit_count()
    return np.bitwise_count(np.asarray(values, dtype=np.uint64)).astype(np.int64)


@dataclass(frozen=True)
class QubitLayout:
    """Data/auxiliary register split over one string of qubits."""

    n_data: int
    n_aux: int

    def __post_init__(self):
        if self.n_data < 1 or self.n_aux < 0:
            raise ValueError("layout needs at least one data qubit")
        if self.n_qubits > 24:
            raise ValueError("layout too large for explicit basis indexing")

    @property
    def n_qubits(self) -> int:
        return self.n_data + self.n_aux

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    @property
    def data_mask(self) -> int:
        return (1 << self.n_data) - 1

    @property
    def aux_mask(self) -> int:
        return ((1 << self.n_aux) - 1) << self.n_data

    def data_qubit(self, i: int) -> int:
        """Bit position of data qubit i (1-based)."""
        if not 1 <= i <= self.n_data:
            raise ValueError(f"data qubit index {i} out of range")
        return i - 1

    def aux_qubit(self, i: int) -> int:
        """Bit position of auxiliary qubit i (1-based)."""
        if not 1 <= i <= self.n_aux:
            raise ValueError(f"auxiliary qubit index {i} out of range")
        return self.n_data + i - 1

    def check_index(self, index: int) -> int:
        index = int(index)
        if not 0 <= index < self.dim:
            raise ValueError(f"basis index {index} out of range for dim {self.dim}")
        return index

    def label(self, index: int) -> str:
        """Pretty-print a basis index as "d...d|a...a" (qubit 1 leftmost)."""
        index = self.check_index(index)
        data = "".join(str((index >> b) & 1) for b in range(self.n_data))
        aux = "".join(str((index >> (self.n_data + b)) & 1) for b in range(self.n_aux))
        return f"{data}|{aux}"

    def index_from_label(self, label: str) -> int:
        data, _, aux = label.partition("|")
        if len(data) != self.n_data or len(aux) != self.n_aux:
            raise ValueError(f"label {label!r} does not match layout {self}")
        index = 0
        for b, ch in enumerate(data):
            index |= (int(ch) & 1) << b
        for b, ch in enumerate(aux):
            index |= (int(ch) & 1) << (self.n_data + b)
        return index


@dataclass(frozen=True)
class PauliTerm:
    """One Hamiltonian term: coeff * Z_q, coeff * Z_q Z_r, or coeff * X_q."""

    axis: str
    qubits: tuple[int, ...]
    coeff: float

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unsupported term axis {self.axis!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "coeff", float(self.coeff))
        n_expected = 2 if self.axis == Z2 else 1
        if len(self.qubits) != n_expected:
            raise ValueError(f"{self.axis} term needs {n_expected} qubit(s)")
        if self.axis == Z2 and self.qubits[0] == self.qubits[1]:
            raise ValueError("ZZ term needs two distinct qubits")
        if not isfinite(self.coeff):
            raise ValueError("term coefficient must be finite")


class IsingXZHamiltonian:
    """Immutable term-list Hamiltonian over a :class:`QubitLayout`.

    ``groups`` maps a provenance tag (which builder produced the terms) to the
    indices of its terms inside ``terms``.
    """

    def __init__(self, layout: QubitLayout, terms: Iterable[PauliTerm],
                 groups: dict[str, tuple[int, ...]] | None = None):
        self.layout = layout
        self.terms = tuple(terms)
        for t in self.terms:
            for q in t.qubits:
                if not 0 <= q < layout.n_qubits:
                    raise ValueError(f"term qubit {q} outside layout")
        self.groups = dict(groups or {})
        self._diag: np.ndarray | None = None

    def __repr__(self):
        return (f"IsingXZHamiltonian(n_data={self.layout.n_data}, "
                f"n_aux={self.layout.n_aux}, n_terms={len(self.terms)})")

    @property
    def dim(self) -> int:
        return self.layout.dim

    def z_terms(self) -> list[PauliTerm]:
        return [t for t in self.terms if t.axis in (Z1, Z2)]

    def x_terms(self) -> list[PauliTerm]:
        return [t for t in self.terms if t.axis == X1]

    def diagonal(self) -> np.ndarray:
        """Classical energies of all basis states (Z1 + Z2 terms only)."""
        if self._diag is None:
            dim = self.dim
            idx = np.arange(dim, dtype=np.int64)
            diag = np.zeros(dim)
            for t in self.terms:
                if t.axis == Z1:
                    diag += t.coeff * (1.0 - 2.0 * ((idx >> t.qubits[0]) & 1))
                elif t.axis == Z2:
                    zi = 1.0 - 2.0 * ((idx >> t.qubits[0]) & 1)
                    zj = 1.0 - 2.0 * ((idx >> t.qubits[1]) & 1)
                    diag += t.coeff * zi * zj
            self._diag = diag
        return self._diag

    def concat(self, other: "IsingXZHamiltonian") -> "IsingXZHamiltonian":
        if other.layout != self.layout:
            raise ValueError("cannot concatenate Hamiltonians on different layouts")
        offset = len(self.terms)
        groups = dict(self.groups)
        for tag, ids in other.groups.items():
            groups[tag] = groups.get(tag, ()) + tuple(i + offset for i in ids)
        return IsingXZHamiltonian(self.layout, self.terms + other.terms, groups)


def grouped_hamiltonian(layout: QubitLayout,
                        grouped_terms: Sequence[tuple[str, Sequence[PauliTerm]]]
                        ) -> IsingXZHamiltonian:
    """Assemble a Hamiltonian from (tag, terms) pairs, recording provenance."""
    terms: list[PauliTerm] = []
    groups: dict[str, tuple[int, ...]] = {}
    for tag, ts in grouped_terms:
        ids = tuple(range(len(terms), len(terms) + len(ts)))
        terms.extend(ts)
        if ids:
            groups[tag] = groups.get(tag, ()) + ids
    return IsingXZHamiltonian(layout, terms, groups)


def logical_hamming_weight(index: int, layout: QubitLayout) -> int:
    """Number of data qubits in |1> for a basis index."""
    index = layout.check_index(index)
    return popcount(index & layout.data_mask)


def logical_hamming_distance(r: int, s: int, layout: QubitLayout) -> int:
    """Number of data qubits on which two basis states differ."""
    r = layout.check_index(r)
    s = layout.check_index(s)
    return popcount((r ^ s) & layout.data_mask)


def _xor_flip(psi: np.ndarray, qubit: int) -> np.ndarray:
    """View of psi with basis indices XOR-ed by 1 << qubit."""
    dim = psi.shape[0]
    lo = 1 << qubit
    return psi.reshape(dim // (2 * lo), 2, lo)[:, ::-1, :].reshape(dim)


def apply(H: IsingXZHamiltonian, psi: np.ndarray) -> np.ndarray:
    """Matrix-free H @ psi."""
    psi = np.asarray(psi)
    if psi.shape != (H.dim,):
        raise ValueError(f"state dimension {psi.shape} does not match {H.dim}")
    out = H.diagonal() * psi
    for t in H.terms:
        if t.axis == X1:
            out = out + t.coeff * _xor_flip(psi, t.qubits[0])
    return out


def diagonal_energy(H: IsingXZHamiltonian, index: int) -> float:
    """Classical Ising energy of one computational basis state."""
    index = H.layout.check_index(index)
    return float(H.diagonal()[index])


def build_dense(H: IsingXZHamiltonian, dense_limit: int = DEFAULT_DENSE_LIMIT) -> np.ndarray:
    """Dense real-symmetric matrix of H (verification view for small systems)."""
    if H.dim > dense_limit:
        raise ValueError(f"dimension {H.dim} exceeds dense limit {dense_limit}")
    M = np.diag(H.diagonal())
    rows = np.arange(H.dim)
    for t in H.terms:
        if t.axis == X1:
            M[rows, rows ^ (1 << t.qubits[0])] += t.coeff
    return M


# -- JSON serialization -------------------------------------------------------

def hamiltonian_to_dict(H: IsingXZHamiltonian) -> dict:
    return {
        "layout": {"n_data": H.layout.n_data, "n_aux": H.layout.n_aux},
        "terms": [
            {"axis": t.axis, "qubits": list(t.qubits), "coeff": t.coeff}
            for t in H.terms
        ],
        "groups": {tag: list(ids) for tag, ids in H.groups.items()},
    }


def hamiltonian_from_dict(data: dict) -> IsingXZHamiltonian:
    layout = QubitLayout(int(data["layout"]["n_data"]), int(data["layout"]["n_aux"]))
    terms = [PauliTerm(t["axis"], tuple(t["qubits"]), t["coeff"]) for t in data["terms"]]
    groups = {tag: tuple(ids) for tag, ids in data.get("groups", {}).items()}
    return IsingXZHamiltonian(layout, terms, groups)


def hamiltonian_to_json(H: IsingXZHamiltonian, **dumps_kwargs) -> str:
    return json.dumps(hamiltonian_to_dict(H), **dumps_kwargs)


def hamiltonian_from_json(text: str) -> IsingXZHamiltonian:
    return hamiltonian_from_dict(json.loads(text))
