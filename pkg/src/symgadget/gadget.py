"""Builders for the two-body Ising gadget and its low-energy manifold checks.

The gadget couples n data qubits all-to-all (strength J) and each data qubit
to each of n auxiliary qubits (also J), with fields h = -J + q0 on the data
qubits and h_i = -J(2i - n) + q0 on auxiliary qubit i.  For 0 < q0 < J the
2^n lowest diagonal states form a degenerate manifold containing exactly one
auxiliary configuration per data configuration: a "staircase" in which the
first m auxiliary qubits are |1> and m equals n minus the logical Hamming
weight, so the auxiliary register counts the data zeros.

Per-sector energy biases are injected through auxiliary fields: a table entry
b[k] contributes -b[k] to auxiliary field k and +b[k] to auxiliary field k+1
(the k = 0 and k = n entries keep only the field that exists), which shifts
manifold sector m = k by 2*b[k] up to a sector-independent constant.  The
weight sector this lands on (w = n - k) is not assumed; `sector_bias_map`
establishes it empirically by probing, and reports carry the result.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from math import isfinite
from typing import Sequence

import numpy as np

from .spin_model import (
    IsingXZHamiltonian,
    PauliTerm,
    QubitLayout,
    X1,
    Z1,
    Z2,
    grouped_hamiltonian,
    popcount,
)

#: exhaustive manifold scans walk 2^(2n) diagonal entries
MAX_ENUMERATION_N = 8

CORRECTION_MODES = ("none", "suppressed", "equal_gamma")


class ManifoldStructureError(RuntimeError):
    """The diagonal spectrum violates the gadget's low-energy construction."""


@dataclass(frozen=True)
class GadgetSpec:
    """Full parameterization of one gadget instance.

    ``bias`` is the dimensionless per-sector table b[0..n]; the physical
    auxiliary fields it generates are scaled by ``eta`` on assembly, so a unit
    entry produces a sector shift of 2*eta in energy units of the spec.
    """

    n: int
    J: float = 1.0
    q0: float | None = None
    eta: float = 0.0
    gamma_d: float = 0.0
    gamma_a: float = 0.0
    bias: tuple[float, ...] = ()
    correction_mode: str = "none"

    def __post_init__(self):
        if self.q0 is None:
            object.__setattr__(self, "q0", 0.5 * self.J)
        if not self.bias:
            object.__setattr__(self, "bias", (0.0,) * (self.n + 1))
        else:
            object.__setattr__(self, "bias", tuple(float(b) for b in self.bias))

    def validate(self) -> "GadgetSpec":
        if self.n < 1:
            raise ValueError("need at least one data qubit")
        if not (self.J > 0 and isfinite(self.J)):
            raise ValueError("J must be positive and finite")
        if not (0 < self.q0 < self.J):
            raise ValueError(f"q0 = {self.q0} outside the permitted range (0, J)")
        if self.gamma_d < 0 or self.gamma_a < 0:
            raise ValueError("transverse field strengths must be non-negative")
        if self.eta < 0:
            raise ValueError("eta must be non-negative")
        if len(self.bias) != self.n + 1:
            raise ValueError(f"bias table needs {self.n + 1} entries, got {len(self.bias)}")
        if not all(isfinite(b) for b in self.bias):
            raise ValueError("bias table entries must be finite")
        if self.correction_mode not in CORRECTION_MODES:
            raise ValueError(f"unknown correction mode {self.correction_mode!r}")
        return self

    @property
    def layout(self) -> QubitLayout:
        return QubitLayout(self.n, self.n)

    def to_dict(self) -> dict:
        return {
            "n": self.n, "J": self.J, "q0": self.q0, "eta": self.eta,
            "gamma_d": self.gamma_d, "gamma_a": self.gamma_a,
            "bias": list(self.bias), "correction_mode": self.correction_mode,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GadgetSpec":
        return cls(
            n=int(data["n"]), J=float(data["J"]), q0=float(data["q0"]),
            eta=float(data.get("eta", 0.0)),
            gamma_d=float(data.get("gamma_d", 0.0)),
            gamma_a=float(data.get("gamma_a", 0.0)),
            bias=tuple(data.get("bias", ())) or (),
            correction_mode=data.get("correction_mode", "none"),
        )


@dataclass(frozen=True)
class ManifoldEntry:
    data_config: str
    aux_config: str
    basis_index: int
    energy: float

    @property
    def weight(self) -> int:
        return self.data_config.count("1")

    @property
    def aux_ones(self) -> int:
        return self.aux_config.count("1")


def aux_fields(spec: GadgetSpec) -> np.ndarray:
    """Auxiliary field coefficients h_i = -J(2i - n) + q0 for i = 1..n."""
    spec.validate()
    i = np.arange(1, spec.n + 1)
    return -spec.J * (2 * i - spec.n) + spec.q0


def build_gadget(spec: GadgetSpec) -> IsingXZHamiltonian:
    """Diagonal gadget: data ZZ, data fields, data-aux ZZ, auxiliary ladder."""
    spec.validate()
    layout = spec.layout
    n, J = spec.n, spec.J
    h = -J + spec.q0
    data_zz = [PauliTerm(Z2, (layout.data_qubit(i), layout.data_qubit(j)), J)
               for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    data_field = [PauliTerm(Z1, (layout.data_qubit(i),), h) for i in range(1, n + 1)]
    data_aux_zz = [PauliTerm(Z2, (layout.data_qubit(i), layout.aux_qubit(j)), J)
                   for i in range(1, n + 1) for j in range(1, n + 1)]
    ladder = aux_fields(spec)
    aux_field = [PauliTerm(Z1, (layout.aux_qubit(i),), ladder[i - 1])
                 for i in range(1, n + 1)]
    return grouped_hamiltonian(layout, [
        ("data_zz", data_zz),
        ("data_field", data_field),
        ("data_aux_zz", data_aux_zz),
        ("aux_field", aux_field),
    ])


def build_transverse(spec: GadgetSpec) -> IsingXZHamiltonian:
    """Driver: -gamma_d X on data qubits, -gamma_a X on auxiliaries."""
    spec.validate()
    layout = spec.layout
    terms = []
    if spec.gamma_d != 0.0:
        terms += [PauliTerm(X1, (layout.data_qubit(i),), -spec.gamma_d)
                  for i in range(1, spec.n + 1)]
    if spec.gamma_a != 0.0:
        terms += [PauliTerm(X1, (layout.aux_qubit(i),), -spec.gamma_a)
                  for i in range(1, spec.n + 1)]
    return grouped_hamiltonian(layout, [("transverse", terms)])


def bias_to_aux_fields(b: Sequence[float], n: int | None = None) -> np.ndarray:
    """Auxiliary field coefficients implementing a per-sector bias table.

    z_i = b[i-1] - b[i] for i = 1..n, i.e. sector entry b[k] places -b[k] on
    auxiliary qubit k and +b[k] on qubit k+1, dropping whichever of the two
    falls off the register at the boundaries.
    """
    b = np.asarray(b, dtype=float)
    if n is None:
        n = b.size - 1
    if b.shape != (n + 1,):
        raise ValueError(f"bias table needs length {n + 1}, got {b.shape}")
    if not np.all(np.isfinite(b)):
        raise ValueError("bias table entries must be finite")
    return b[:-1] - b[1:]


def _aux_field_hamiltonian(spec: GadgetSpec, z: np.ndarray, tag: str) -> IsingXZHamiltonian:
    layout = spec.layout
    terms = [PauliTerm(Z1, (layout.aux_qubit(i),), z[i - 1])
             for i in range(1, spec.n + 1) if z[i - 1] != 0.0]
    return grouped_hamiltonian(layout, [(tag, terms)])


def build_bias_potential(spec: GadgetSpec) -> IsingXZHamiltonian:
    """Unscaled potential fields from the spec's bias table (assembly applies eta)."""
    spec.validate()
    return _aux_field_hamiltonian(spec, bias_to_aux_fields(spec.bias, spec.n), "bias")


def _add_aux_fields(spec: GadgetSpec, diag: np.ndarray, z: np.ndarray) -> np.ndarray:
    if np.any(z != 0.0):
        layout = spec.layout
        idx = np.arange(layout.dim, dtype=np.int64)
        for i in range(1, spec.n + 1):
            if z[i - 1] != 0.0:
                q = layout.aux_qubit(i)
                diag += z[i - 1] * (1.0 - 2.0 * ((idx >> q) & 1))
    return diag


def _problem_diagonal(spec: GadgetSpec,
                      correction: IsingXZHamiltonian | None = None) -> np.ndarray:
    """Diagonal of gadget + eta * bias fields (+ optional correction fields)."""
    diag = build_gadget(spec).diagonal().copy()
    diag = _add_aux_fields(spec, diag, spec.eta * bias_to_aux_fields(spec.bias, spec.n))
    if correction is not None:
        diag = diag + correction.diagonal()
    return diag


def _staircase_aux(m: int) -> int:
    return (1 << m) - 1


def enumerate_manifold(spec: GadgetSpec, tol: float | None = None) -> list[ManifoldEntry]:
    """Per data configuration, the auxiliary configuration of least energy.

    Exhaustive over all 2^(2n) diagonal energies.  Raises
    :class:`ManifoldStructureError` if any minimizer is not unique, is not a
    staircase, or does not satisfy m = n - w.
    """
    spec.validate()
    if spec.n > MAX_ENUMERATION_N:
        raise ValueError(f"exhaustive enumeration limited to n <= {MAX_ENUMERATION_N}")
    if tol is None:
        tol = 1e-9 * spec.J
    layout = spec.layout
    n = spec.n
    diag = _problem_diagonal(spec)
    table = diag.reshape(1 << n, 1 << n)  # [aux, data]
    best_aux = np.argmin(table, axis=0)
    best_energy = table[best_aux, np.arange(1 << n)]
    ties = (table < best_energy[None, :] + tol).sum(axis=0)
    entries = []
    problems = []
    for data in range(1 << n):
        aux = int(best_aux[data])
        index = data + (aux << n)
        label = layout.label(index)
        if ties[data] > 1:
            problems.append(f"non-unique minimizer for data config {label.split('|')[0]}")
            continue
        m = popcount(aux)
        if aux != _staircase_aux(m):
            problems.append(f"minimizer {label} is not a staircase")
        elif m != n - popcount(data):
            problems.append(f"minimizer {label} has m = {m}, expected n - w = {n - popcount(data)}")
        entries.append(ManifoldEntry(
            data_config=label.split("|")[0],
            aux_config=label.split("|")[1],
            basis_index=index,
            energy=float(best_energy[data]),
        ))
    if problems:
        raise ManifoldStructureError("; ".join(problems))
    return entries


def manifold_indices(spec: GadgetSpec) -> np.ndarray:
    """Manifold basis indices ordered by data configuration 0 .. 2^n - 1."""
    return np.array([e.basis_index for e in enumerate_manifold(spec)], dtype=np.int64)


@dataclass(frozen=True)
class SectorBiasMap:
    """Empirically probed map from bias-table index k to the sector it moves."""

    n: int
    weight_for_index: tuple[int, ...]   # k -> logical Hamming weight of the shifted sector
    shift_per_unit: tuple[float, ...]   # energy shift of that sector per unit eta*b[k]

    def index_for_weight(self, w: int) -> int:
        return self.weight_for_index.index(w)


def sector_bias_map(spec: GadgetSpec, probe: float = 1e-3) -> SectorBiasMap:
    """Probe each bias-table entry and record which weight sector it shifts.

    The probe compares manifold sector energies with and without a unit bias
    on each table slot; the slot's sector is the one whose energy moves away
    from the common drift.
    """
    spec.validate()
    base = replace(spec, eta=probe * spec.J, bias=(0.0,) * (spec.n + 1))
    base_entries = enumerate_manifold(base)
    base_by_w = _sector_energies(base_entries, spec.n)
    weights = []
    shifts = []
    for k in range(spec.n + 1):
        b = [0.0] * (spec.n + 1)
        b[k] = 1.0
        probed = enumerate_manifold(replace(base, bias=tuple(b)))
        delta = _sector_energies(probed, spec.n) - base_by_w
        delta_rel = delta - np.median(delta)
        w = int(np.argmax(np.abs(delta_rel)))
        weights.append(w)
        shifts.append(float(delta_rel[w] / (probe * spec.J)))
    return SectorBiasMap(spec.n, tuple(weights), tuple(shifts))


def _sector_energies(entries: list[ManifoldEntry], n: int) -> np.ndarray:
    out = np.full(n + 1, np.nan)
    for w in range(n + 1):
        es = [e.energy for e in entries if e.weight == w]
        if max(es) - min(es) > 1e-9 * max(1.0, abs(es[0])):
            raise ManifoldStructureError(f"sector {w} energies not uniform")
        out[w] = es[0]
    return out


@dataclass(frozen=True)
class SingleFlipReport:
    """Outcome of the intermediate-state structure check.

    For every pair of manifold states at logical distance 1 the transition
    must proceed by one data flip plus one auxiliary flip, and the two
    single-flip intermediates must sit at J and 3J above the starting state,
    one in each branch (up to O(eta) when biases are on).
    """

    n: int
    pairs_checked: int
    max_deviation: float
    tolerance: float
    violations: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def verify_single_flip_structure(spec: GadgetSpec, tol: float | None = None) -> SingleFlipReport:
    spec.validate()
    if tol is None:
        # exact at eta = 0; biased runs move intermediate energies by O(eta)
        tol = 1e-9 * spec.J if spec.eta == 0.0 else 5.0 * spec.eta * spec.J
    entries = enumerate_manifold(spec)
    diag = _problem_diagonal(spec)
    layout = spec.layout
    by_index = {e.basis_index: e for e in entries}
    pairs = 0
    max_dev = 0.0
    violations: list[str] = []
    for r in entries:
        for s in entries:
            if r.basis_index >= s.basis_index:
                continue
            x = r.basis_index ^ s.basis_index
            if popcount(x & layout.data_mask) != 1:
                continue
            pairs += 1
            if popcount(x) != 2 or popcount(x & layout.aux_mask) != 1:
                violations.append(
                    f"{layout.label(r.basis_index)} <-> {layout.label(s.basis_index)}: "
                    f"not one data flip plus one auxiliary flip")
                continue
            data_bit = x & layout.data_mask
            aux_bit = x & layout.aux_mask
            gaps = sorted(
                float(diag[r.basis_index ^ bit] - diag[r.basis_index])
                for bit in (data_bit, aux_bit)
            )
            dev = max(abs(gaps[0] - spec.J), abs(gaps[1] - 3 * spec.J))
            max_dev = max(max_dev, dev)
            if dev > tol:
                violations.append(
                    f"{layout.label(r.basis_index)} -> {layout.label(s.basis_index)}: "
                    f"intermediate excitations {gaps[0]:.6g}, {gaps[1]:.6g} "
                    f"(expected {spec.J:.6g} and {3 * spec.J:.6g})")
    return SingleFlipReport(spec.n, pairs, max_dev, tol, tuple(violations))


def same_weight_hop_amplitude(spec: GadgetSpec) -> float:
    """Leading-order amplitude of weight-preserving data hops: -4 gamma_d^2 / (3J)."""
    return -4.0 * spec.gamma_d**2 / (3.0 * spec.J)


def build_correction(spec: GadgetSpec, fluctuations: Sequence[float]) -> IsingXZHamiltonian:
    """Auxiliary fields cancelling the per-sector second-order energy shifts.

    ``suppressed`` flattens the fluctuation table F[w]; ``equal_gamma``
    additionally compensates the energy the weight-preserving hops give the
    uniform state of each sector, F[w] + same_weight_amp * w(n-w).  Two index
    conventions meet here: F is tabulated by logical weight w while bias-table
    slot k shifts the sector whose auxiliary count is k, i.e. weight n - k
    (the empirical slot<->weight map), so the per-weight target is reversed
    into the slots.  Entries are halved because a slot moves its sector by
    twice its value.
    """
    spec.validate()
    if spec.correction_mode == "none":
        return grouped_hamiltonian(spec.layout, [("correction", [])])
    F = np.asarray(fluctuations, dtype=float)
    if F.shape != (spec.n + 1,):
        raise ValueError(f"fluctuation table needs length {spec.n + 1}, got {F.shape}")
    w = np.arange(spec.n + 1, dtype=float)
    target = F.copy()
    if spec.correction_mode == "equal_gamma":
        target = target + same_weight_hop_amplitude(spec) * w * (spec.n - w)
    slot_table = -0.5 * target[::-1]
    z = bias_to_aux_fields(slot_table, spec.n)
    return _aux_field_hamiltonian(spec, z, "correction")


def assemble_total(spec: GadgetSpec,
                   fluctuations: Sequence[float] | None = None) -> IsingXZHamiltonian:
    """Gadget + transverse driver + correction fields + eta-scaled bias fields."""
    spec.validate()
    H = build_gadget(spec).concat(build_transverse(spec))
    if spec.correction_mode != "none":
        if fluctuations is None:
            from .perturbation import fluctuation_table  # cycle broken lazily
            fluctuations = fluctuation_table(spec)
        H = H.concat(build_correction(spec, fluctuations))
    z = spec.eta * bias_to_aux_fields(spec.bias, spec.n)
    return H.concat(_aux_field_hamiltonian(spec, z, "bias"))


# -- reporting ----------------------------------------------------------------

def manifold_report(spec: GadgetSpec) -> dict:
    """Structured summary: entries, degeneracy spread, bias map, flip check."""
    entries = enumerate_manifold(spec)
    energies = np.array([e.energy for e in entries])
    flips = verify_single_flip_structure(spec)
    bias_map = sector_bias_map(spec)
    return {
        "spec": spec.to_dict(),
        "entries": [
            {"data": e.data_config, "aux": e.aux_config,
             "index": e.basis_index, "energy": e.energy}
            for e in entries
        ],
        "energy_spread": float(energies.max() - energies.min()),
        "sector_energies": {str(w): float(v)
                            for w, v in enumerate(_sector_energies(entries, spec.n))},
        "bias_map": {
            "weight_for_index": list(bias_map.weight_for_index),
            "shift_per_unit": list(bias_map.shift_per_unit),
        },
        "single_flip": {
            "pairs_checked": flips.pairs_checked,
            "max_deviation": flips.max_deviation,
            "tolerance": flips.tolerance,
            "violations": list(flips.violations),
        },
    }


def manifold_table(spec: GadgetSpec) -> str:
    """Human-readable manifold listing with "d...d|a...a" labels."""
    entries = enumerate_manifold(spec)
    lines = [f"{'state':>{2 * spec.n + 1}}  {'w':>2}  {'m':>2}  energy"]
    for e in entries:
        lines.append(f"{e.data_config}|{e.aux_config}  {e.weight:>2}  {e.aux_ones:>2}  "
                     f"{e.energy:.12g}")
    return "\n".join(lines)


def manifold_report_json(spec: GadgetSpec, **dumps_kwargs) -> str:
    return json.dumps(manifold_report(spec), **dumps_kwargs)
