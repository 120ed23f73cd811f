"""Gate-schedule compilation for diagonal couplings and the full XZ model.

The native two-qubit primitive is the conditional phase gate
U_cp(phi) = diag(1, 1, 1, e^{-i phi}) = exp(-i phi C_i C_j) with
C = (1 - Z)/2.  Substituting Z = 1 - 2C into Z_i Z_j = 4 C_i C_j
- 2(C_i + C_j) + 1 and exponentiating the commuting pieces gives the exact
identity implemented by `zz_to_condphase`:

    exp(-i phi Z_i Z_j) = e^{i phi} * U_cp(4 phi) * Rz_i(2 phi) * Rz_j(2 phi)

with Rz(theta) = exp(-i theta Z / 2).  Note the conditional-phase angle is
four times the ZZ angle and the single-qubit rotations carry a definite
sign; a dense 4x4 comparison against the matrix exponential pins these
factors, which loose operator-identity bookkeeping tends to drop.

Trotterization is first order with the fixed term-group order
(one-body Z, two-body ZZ, one-body X) for reproducibility.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import cos, pi
from typing import Iterable, Sequence

import numpy as np

from .spin_model import IsingXZHamiltonian, X1, Z1, Z2

COND_PHASE = "cond_phase"
Z_ROT = "z_rot"
X_ROT = "x_rot"
_KINDS = (COND_PHASE, Z_ROT, X_ROT)


@dataclass(frozen=True)
class GateOp:
    kind: str
    qubits: tuple[int, ...]
    angle: float

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "angle", float(self.angle))
        if not np.isfinite(self.angle):
            raise ValueError("gate angle must be finite")
        need = 2 if self.kind == COND_PHASE else 1
        if len(self.qubits) != need:
            raise ValueError(f"{self.kind} needs {need} qubit(s)")
        if self.kind == COND_PHASE and self.qubits[0] == self.qubits[1]:
            raise ValueError("conditional phase needs two distinct qubits")


@dataclass(frozen=True)
class GateSchedule:
    """Ordered gate list; the realized unitary is e^{i global_phase} * ops."""

    n_qubits: int
    ops: tuple[GateOp, ...] = ()
    global_phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        for op in self.ops:
            if any(q >= self.n_qubits or q < 0 for q in op.qubits):
                raise ValueError(f"gate {op} outside {self.n_qubits} qubits")

    def __len__(self):
        return len(self.ops)

    def then(self, other: "GateSchedule") -> "GateSchedule":
        if other.n_qubits != self.n_qubits:
            raise ValueError("schedules act on different register sizes")
        return GateSchedule(self.n_qubits, self.ops + other.ops,
                            self.global_phase + other.global_phase)


def _op_unitary(op: GateOp, n_qubits: int) -> np.ndarray:
    dim = 1 << n_qubits
    if op.kind == COND_PHASE:
        i, j = op.qubits
        diag = np.ones(dim, dtype=complex)
        idx = np.arange(dim)
        both = ((idx >> i) & 1).astype(bool) & ((idx >> j) & 1).astype(bool)
        diag[both] = np.exp(-1j * op.angle)
        return np.diag(diag)
    if op.kind == Z_ROT:
        (q,) = op.qubits
        idx = np.arange(dim)
        z = 1.0 - 2.0 * ((idx >> q) & 1)
        return np.diag(np.exp(-1j * op.angle / 2.0 * z))
    (q,) = op.qubits
    c, s = np.cos(op.angle / 2.0), np.sin(op.angle / 2.0)
    U = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(dim)
    U[idx, idx] = c
    U[idx, idx ^ (1 << q)] = -1j * s
    return U


def schedule_unitary(schedule: GateSchedule) -> np.ndarray:
    """Dense unitary of the schedule, ops applied left to right."""
    if schedule.n_qubits > 12:
        raise ValueError("dense schedule verification limited to 12 qubits")
    dim = 1 << schedule.n_qubits
    U = np.eye(dim, dtype=complex)
    for op in schedule.ops:
        U = _op_unitary(op, schedule.n_qubits) @ U
    return np.exp(1j * schedule.global_phase) * U


def zz_to_condphase(phi: float, i: int, j: int,
                    n_qubits: int | None = None) -> GateSchedule:
    """Schedule realizing exp(-i phi Z_i Z_j) exactly (global phase tracked)."""
    if i == j:
        raise ValueError("ZZ evolution needs two distinct qubits")
    if n_qubits is None:
        n_qubits = max(i, j) + 1
    if phi == 0.0:
        return GateSchedule(n_qubits)
    ops = (
        GateOp(COND_PHASE, (i, j), 4.0 * phi),
        GateOp(Z_ROT, (i,), 2.0 * phi),
        GateOp(Z_ROT, (j,), 2.0 * phi),
    )
    return GateSchedule(n_qubits, ops, global_phase=phi)


def trotterize(H: IsingXZHamiltonian, dt: float, steps: int) -> GateSchedule:
    """First-order product formula for exp(-i H dt steps).

    Per step: all one-body Z terms as Rz, all ZZ terms through the
    conditional-phase identity, all X terms as Rx.  Zero-angle gates are
    elided.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if steps < 0:
        raise ValueError("steps must be non-negative")
    n_qubits = H.layout.n_qubits
    step_ops: list[GateOp] = []
    step_phase = 0.0
    z1 = [t for t in H.terms if t.axis == Z1]
    z2 = [t for t in H.terms if t.axis == Z2]
    x1 = [t for t in H.terms if t.axis == X1]
    for t in z1:
        if t.coeff != 0.0:
            step_ops.append(GateOp(Z_ROT, t.qubits, 2.0 * t.coeff * dt))
    for t in z2:
        if t.coeff != 0.0:
            sub = zz_to_condphase(t.coeff * dt, t.qubits[0], t.qubits[1], n_qubits)
            step_ops.extend(sub.ops)
            step_phase += sub.global_phase
    for t in x1:
        if t.coeff != 0.0:
            step_ops.append(GateOp(X_ROT, t.qubits, 2.0 * t.coeff * dt))
    return GateSchedule(n_qubits, tuple(step_ops) * steps, step_phase * steps)


def schedule_error(schedule: GateSchedule, H: IsingXZHamiltonian,
                   total_time: float) -> float:
    """Spectral-norm distance between the schedule unitary and exp(-i H t)."""
    import scipy.linalg as sla
    from .spin_model import build_dense
    target = sla.expm(-1j * total_time * build_dense(H))
    return float(np.linalg.norm(schedule_unitary(schedule) - target, ord=2))


# -- QUBO <-> Ising -------------------------------------------------------------

def qubo_to_ising(Q: np.ndarray, c: Sequence[float] | None = None
                  ) -> tuple[np.ndarray, np.ndarray, float]:
    """Map sum_{i<=j} Q_ij x_i x_j + sum_i c_i x_i to couplings, fields, offset.

    Uses x = (1 - z)/2 with z = +/-1; the returned (J2, h, offset) satisfy
    QUBO(x) = sum_{i<j} J2_ij z_i z_j + sum_i h_i z_i + offset for every
    binary assignment.  Q is read as upper-triangular (diagonal = linear
    terms, since x^2 = x).
    """
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValueError("Q must be a square matrix")
    if not np.all(np.isfinite(Q)):
        raise ValueError("Q entries must be finite")
    m = Q.shape[0]
    lin = np.zeros(m) if c is None else np.asarray(c, dtype=float)
    if lin.shape != (m,):
        raise ValueError("linear term length does not match Q")
    J2 = np.zeros((m, m))
    h = np.zeros(m)
    offset = 0.0
    for i in range(m):
        qi = Q[i, i] + lin[i]
        h[i] -= qi / 2.0
        offset += qi / 2.0
        for j in range(i + 1, m):
            q = Q[i, j] + Q[j, i]  # tolerate symmetric input
            if q != 0.0:
                J2[i, j] += q / 4.0
                h[i] -= q / 4.0
                h[j] -= q / 4.0
                offset += q / 4.0
    return J2, h, offset


def ising_to_qubo(J2: np.ndarray, h: Sequence[float], offset: float = 0.0
                  ) -> tuple[np.ndarray, np.ndarray, float]:
    """Inverse of :func:`qubo_to_ising` via z = 1 - 2x."""
    J2 = np.asarray(J2, dtype=float)
    h = np.asarray(h, dtype=float)
    m = h.size
    Q = np.zeros((m, m))
    lin = np.zeros(m)
    const = float(offset)
    for i in range(m):
        lin[i] -= 2.0 * h[i]
        const += h[i]
        for j in range(i + 1, m):
            J = J2[i, j] + J2[j, i]
            if J != 0.0:
                Q[i, j] += 4.0 * J
                lin[i] -= 2.0 * J
                lin[j] -= 2.0 * J
                const += J
    return Q, lin, const


def qubo_energy(Q: np.ndarray, c: Sequence[float], x: Sequence[int]) -> float:
    x = np.asarray(x, dtype=float)
    Q = np.asarray(Q, dtype=float)
    return float(x @ np.triu(Q) @ x + np.asarray(c, dtype=float) @ x)


def ising_energy(J2: np.ndarray, h: Sequence[float], offset: float,
                 z: Sequence[int]) -> float:
    z = np.asarray(z, dtype=float)
    return float(z @ np.triu(np.asarray(J2), 1) @ z + np.asarray(h) @ z + offset)


def angular_factor(theta: float) -> float:
    """Dipolar angle dependence 3 cos^2(theta) - 1; zero at the magic angle."""
    return 3.0 * cos(theta) ** 2 - 1.0


MAGIC_ANGLE = float(np.arccos(1.0 / np.sqrt(3.0)))


# -- serialization ---------------------------------------------------------------

def schedule_to_dict(schedule: GateSchedule) -> dict:
    return {
        "n_qubits": schedule.n_qubits,
        "global_phase": schedule.global_phase,
        "ops": [{"kind": op.kind, "qubits": list(op.qubits), "angle": op.angle}
                for op in schedule.ops],
    }


def schedule_from_dict(data: dict) -> GateSchedule:
    ops = tuple(GateOp(o["kind"], tuple(o["qubits"]), o["angle"]) for o in data["ops"])
    return GateSchedule(int(data["n_qubits"]), ops, float(data.get("global_phase", 0.0)))


def schedule_to_json(schedule: GateSchedule, **kwargs) -> str:
    return json.dumps(schedule_to_dict(schedule), **kwargs)


def schedule_from_json(text: str) -> GateSchedule:
    return schedule_from_dict(json.loads(text))
