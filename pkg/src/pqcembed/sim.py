"""Dense exact simulation of few-qubit quantum states.

Conventions, fixed for the whole package:

* Qubit 0 is the least-significant bit of the amplitude index: basis state
  ``i`` assigns qubit ``q`` the bit ``(i >> q) & 1``.
* Rotation gates are ``exp(i * theta * P)`` for a Pauli generator ``P``.
  The period in ``theta`` is 2*pi and ``d/dtheta exp(i theta P) = iP exp(i theta P)``.
* :func:`expectation_z` returns the probability of the ``|1>`` outcome of a
  Z-basis measurement (a value in [0, 1], not the signed Pauli expectation).

States are immutable from the caller's point of view: every operation returns
a new state. Register sizes up to 8 qubits are the intended regime; storage is
always dense.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import cos, sin

import numba
import numpy as np

NORM_TOL = 1e-10

PAULIS = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

GATE_KINDS = ("h", "x", "z", "rot", "cpauli", "cnot", "cz", "cswap")


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class StateVector:
    """Pure state over ``num_qubits`` qubits, 2^n complex amplitudes."""

    amplitudes: np.ndarray
    num_qubits: int

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state over ``num_qubits`` qubits, 2^n x 2^n complex matrix."""

    matrix: np.ndarray
    num_qubits: int

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


QuantumState = StateVector | DensityMatrix


def statevector(amplitudes, *, normalize: bool = False) -> StateVector:
    amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
    n = int(np.log2(len(amps)))
    if 2**n != len(amps):
        raise ValueError(f"amplitude count {len(amps)} is not a power of two")
    if normalize:
        amps = amps / np.linalg.norm(amps)
    elif abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
        raise ValueError("state vector is not normalized")
    return StateVector(amps, n)


def zero_state(num_qubits: int) -> StateVector:
    return basis_state(num_qubits, 0)


def basis_state(num_qubits: int, index: int) -> StateVector:
    """Computational basis state |index> (qubit q holds bit (index >> q) & 1)."""
    if not 0 <= index < 2**num_qubits:
        raise ValueError(f"basis index {index} out of range for {num_qubits} qubits")
    amps = np.zeros(2**num_qubits, dtype=complex)
    amps[index] = 1.0
    return StateVector(amps, num_qubits)


def density_matrix(matrix) -> DensityMatrix:
    mat = np.asarray(matrix, dtype=complex)
    n = int(np.log2(mat.shape[0]))
    if mat.shape != (2**n, 2**n):
        raise ValueError(f"matrix shape {mat.shape} is not 2^n x 2^n")
    return DensityMatrix(mat, n)


def maximally_mixed(num_qubits: int) -> DensityMatrix:
    dim = 2**num_qubits
    return DensityMatrix(np.eye(dim, dtype=complex) / dim, num_qubits)


def to_density(psi: StateVector) -> DensityMatrix:
    """|psi><psi| of a normalized pure state."""
    return DensityMatrix(np.outer(psi.amplitudes, psi.amplitudes.conj()), psi.num_qubits)


def tensor(a: QuantumState, b: QuantumState) -> QuantumState:
    """Kronecker product; ``a`` occupies the lower qubit indices of the result."""
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(np.kron(b.amplitudes, a.amplitudes), a.num_qubits + b.num_qubits)
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(b.matrix, a.matrix), a.num_qubits + b.num_qubits)
    raise ValueError("tensor requires two states of the same representation")


# ---------------------------------------------------------------------------
# gates


@dataclass(frozen=True)
class Gate:
    """One gate application. ``angle`` stays None for an unbound parameter slot."""

    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    pauli: str | None = None
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if set(self.targets) & set(self.controls):
            raise ValueError("targets and controls must be disjoint")
        n_t, n_c = _ARITY[self.kind]
        if len(self.targets) != n_t or len(self.controls) != n_c:
            raise ValueError(f"{self.kind} expects {n_t} target(s), {n_c} control(s)")
        if self.kind in ("rot", "cpauli") and self.pauli not in PAULIS:
            raise ValueError(f"{self.kind} needs a pauli in {sorted(PAULIS)}")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + self.targets


_ARITY = {
    "h": (1, 0),
    "x": (1, 0),
    "z": (1, 0),
    "rot": (1, 0),
    "cpauli": (1, 1),
    "cnot": (1, 1),
    "cz": (1, 1),
    "cswap": (2, 1),
}


def h(q: int) -> Gate:
    return Gate("h", (q,))


def x(q: int) -> Gate:
    return Gate("x", (q,))


def z(q: int) -> Gate:
    return Gate("z", (q,))


def rotation(pauli: str, q: int, angle: float | None = None) -> Gate:
    """exp(i*angle*P) on qubit q; angle=None leaves the slot unbound."""
    return Gate("rot", (q,), pauli=pauli, angle=angle)


def rx(q: int, angle: float | None = None) -> Gate:
    return rotation("x", q, angle)


def rz(q: int, angle: float | None = None) -> Gate:
    return rotation("z", q, angle)


def controlled_pauli(pauli: str, control: int, target: int) -> Gate:
    return Gate("cpauli", (target,), (control,), pauli=pauli)


def cnot(control: int, target: int) -> Gate:
    return Gate("cnot", (target,), (control,))


def cz(control: int, target: int) -> Gate:
    return Gate("cz", (target,), (control,))


def cswap(control: int, a: int, b: int) -> Gate:
    return Gate("cswap", (a, b), (control,))


def _single_qubit_unitary(gate: Gate) -> np.ndarray:
    if gate.kind == "h":
        return _H
    if gate.kind == "x":
        return PAULIS["x"]
    if gate.kind == "z":
        return PAULIS["z"]
    if gate.kind == "rot":
        if gate.angle is None:
            raise ValueError(f"rotation gate on qubit {gate.targets[0]} has unbound angle")
        # exp(i*t*P) = cos(t) I + i sin(t) P for any Pauli P
        t = gate.angle
        return cos(t) * np.eye(2) + 1j * sin(t) * PAULIS[gate.pauli]
    if gate.kind == "cpauli":
        return PAULIS[gate.pauli]
    raise ValueError(f"{gate.kind} has no single-qubit unitary")


def gate_matrix(gate: Gate) -> np.ndarray:
    """Dense unitary on the gate's own qubits (ordered controls then targets,
    control as the low bit). Used for verification, not in the hot path."""
    if gate.kind in ("h", "x", "z", "rot"):
        return _single_qubit_unitary(gate)
    if gate.kind in ("cpauli", "cnot", "cz"):
        u = PAULIS["x"] if gate.kind == "cnot" else PAULIS["z"] if gate.kind == "cz" else PAULIS[gate.pauli]
        m = np.eye(4, dtype=complex)
        m[1::2, 1::2] = u  # control bit (low) = 1 block
        return m
    if gate.kind == "cswap":
        m = np.eye(8, dtype=complex)
        # control low bit = 1, swap the two target bits: indices 0b011 <-> 0b101
        m[[3, 5], :] = m[[5, 3], :]
        return m
    raise ValueError(f"unknown gate kind {gate.kind!r}")


# ---------------------------------------------------------------------------
# kernels: numba-compiled bit-masked loops over (batch, 2^n) amplitude
# arrays; the same code serves single vectors, batches, and the row/column
# passes of density-matrix updates.


@numba.njit(cache=True)
def _nb_mix_pair(arr, u00, u01, u10, u11, q):
    step = 1 << q
    block = step << 1
    for r in range(arr.shape[0]):
        row = arr[r]
        for base in range(0, row.size, block):
            for i0 in range(base, base + step):
                i1 = i0 + step
                a = row[i0]
                b = row[i1]
                row[i0] = u00 * a + u01 * b
                row[i1] = u10 * a + u11 * b


@numba.njit(cache=True)
def _nb_mix_pair_controlled(arr, u00, u01, u10, u11, control, q):
    step = 1 << q
    block = step << 1
    cbit = 1 << control
    for r in range(arr.shape[0]):
        row = arr[r]
        for base in range(0, row.size, block):
            for i0 in range(base, base + step):
                if i0 & cbit:
                    i1 = i0 + step
                    a = row[i0]
                    b = row[i1]
                    row[i0] = u00 * a + u01 * b
                    row[i1] = u10 * a + u11 * b


@numba.njit(cache=True)
def _nb_phase_flip(arr, a_bit, b_bit):
    mask = (1 << a_bit) | (1 << b_bit)
    for r in range(arr.shape[0]):
        row = arr[r]
        for i in range(row.size):
            if i & mask == mask:
                row[i] = -row[i]


@numba.njit(cache=True)
def _nb_controlled_swap(arr, control, a_bit, b_bit):
    cmask = 1 << control
    amask = 1 << a_bit
    bmask = 1 << b_bit
    for r in range(arr.shape[0]):
        row = arr[r]
        for i in range(row.size):
            if (i & cmask) and (i & amask) and not (i & bmask):
                j = (i & ~amask) | bmask
                row[i], row[j] = row[j], row[i]


@numba.njit(cache=True)
def _nb_depolarize_flat(arr, lam, fill, dim):
    for r in range(arr.shape[0]):
        row = arr[r]
        for i in range(row.size):
            row[i] = lam * row[i]
        for k in range(dim):
            row[k * (dim + 1)] += fill


def _rows(arr: np.ndarray) -> np.ndarray:
    """2-D (batch, amplitudes) view of a contiguous (..., 2^n) array."""
    if not arr.flags.c_contiguous:
        raise ValueError("kernel input must be C-contiguous")
    return arr.reshape(-1, arr.shape[-1])


def _apply_gate_inplace(arr: np.ndarray, gate: Gate, num_qubits: int,
                        offset: int = 0, conj: bool = False) -> None:
    """Mutate ``arr`` (contiguous, last axis of length 2^num_qubits) by
    ``gate`` with all qubit positions shifted by ``offset``; ``conj`` applies
    the elementwise-conjugated gate matrix (the column side of a
    density-matrix update)."""
    rows = _rows(arr)
    if gate.kind in ("h", "x", "z", "rot", "cpauli", "cnot"):
        u = PAULIS["x"] if gate.kind == "cnot" else _single_qubit_unitary(gate)
        if conj:
            u = u.conj()
        t = gate.targets[0] + offset
        if gate.controls:
            _nb_mix_pair_controlled(rows, u[0, 0], u[0, 1], u[1, 0], u[1, 1],
                                    gate.controls[0] + offset, t)
        else:
            _nb_mix_pair(rows, u[0, 0], u[0, 1], u[1, 0], u[1, 1], t)
    elif gate.kind == "cz":
        _nb_phase_flip(rows, gate.controls[0] + offset, gate.targets[0] + offset)
    elif gate.kind == "cswap":
        _nb_controlled_swap(rows, gate.controls[0] + offset,
                            gate.targets[0] + offset, gate.targets[1] + offset)
    else:
        raise ValueError(f"unknown gate kind {gate.kind!r}")


def apply_gate_amplitudes(arr: np.ndarray, gate: Gate, num_qubits: int) -> np.ndarray:
    """Apply ``gate`` along the last axis of ``arr`` (shape (..., 2^n))."""
    out = arr.copy()
    _apply_gate_inplace(out, gate, num_qubits)
    return out


def _apply_gate_density_flat(flat: np.ndarray, gate: Gate, num_qubits: int) -> None:
    """G rho G† on vec(rho): the row index occupies the high ``num_qubits``
    bits of the flattened (..., 4^n) array, the column index the low bits."""
    _apply_gate_inplace(flat, gate, 2 * num_qubits, offset=0, conj=True)
    _apply_gate_inplace(flat, gate, 2 * num_qubits, offset=num_qubits, conj=False)


def apply_gate_density(mats: np.ndarray, gate: Gate, num_qubits: int) -> np.ndarray:
    """G rho G† along the last two axes of ``mats`` (shape (..., 2^n, 2^n))."""
    dim = mats.shape[-1]
    flat = np.ascontiguousarray(mats).reshape(mats.shape[:-2] + (dim * dim,)).copy()
    _apply_gate_density_flat(flat, gate, num_qubits)
    return flat.reshape(mats.shape)


def _check_qubits(gate: Gate, num_qubits: int) -> None:
    for q in gate.qubits:
        if not 0 <= q < num_qubits:
            raise ValueError(f"gate qubit {q} out of range for {num_qubits}-qubit state")


def apply_gate(state: QuantumState, gate: Gate) -> QuantumState:
    """G|psi> for a state vector, G rho G† for a density matrix."""
    _check_qubits(gate, state.num_qubits)
    if isinstance(state, StateVector):
        return StateVector(apply_gate_amplitudes(state.amplitudes, gate, state.num_qubits), state.num_qubits)
    return DensityMatrix(apply_gate_density(state.matrix, gate, state.num_qubits), state.num_qubits)


# ---------------------------------------------------------------------------
# channels


@dataclass(frozen=True)
class DepolarizingChannel:
    """Global depolarizing channel: rho -> lam*rho + (1-lam) I / 2^n."""

    lam: float
    num_qubits: int

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"depolarizing lambda {self.lam} outside [0, 1]")


def depolarize_array(mats: np.ndarray, lam: float, num_qubits: int) -> np.ndarray:
    dim = 2**num_qubits
    return lam * mats + (1.0 - lam) / dim * np.eye(dim, dtype=complex)


def _depolarize_flat_inplace(flat: np.ndarray, lam: float, num_qubits: int) -> None:
    dim = 2**num_qubits
    _nb_depolarize_flat(_rows(flat), lam, (1.0 - lam) / dim, dim)


def apply_depolarizing(rho: DensityMatrix, channel: DepolarizingChannel) -> DensityMatrix:
    if channel.num_qubits != rho.num_qubits:
        raise ValueError("channel width does not match the state")
    return DensityMatrix(depolarize_array(rho.matrix, channel.lam, rho.num_qubits), rho.num_qubits)


# ---------------------------------------------------------------------------
# circuit execution


def run_gates(state: QuantumState, gates, channel: DepolarizingChannel | None = None,
              insertion: str = "gate") -> QuantumState:
    """Apply a gate sequence. With a channel, the state must be a density
    matrix; insertion 'gate' applies the channel after every gate, 'readout'
    once after the last gate."""
    gates = tuple(gates)
    for g in gates:
        _check_qubits(g, state.num_qubits)
    if channel is None:
        if isinstance(state, StateVector):
            return StateVector(run_gates_amplitudes(state.amplitudes, gates, state.num_qubits),
                               state.num_qubits)
        return DensityMatrix(run_gates_density(state.matrix, gates, state.num_qubits),
                             state.num_qubits)
    if not isinstance(state, DensityMatrix):
        raise ValueError("noisy execution requires a density matrix")
    if insertion not in ("gate", "readout"):
        raise ValueError(f"unknown noise insertion {insertion!r}")
    mat = run_gates_density(state.matrix, gates, state.num_qubits,
                            lam=channel.lam, insertion=insertion)
    return DensityMatrix(mat, state.num_qubits)


def run_gates_amplitudes(arr: np.ndarray, gates, num_qubits: int) -> np.ndarray:
    """Noiseless batched run over amplitude arrays of shape (..., 2^n)."""
    arr = arr.copy()
    for g in gates:
        _apply_gate_inplace(arr, g, num_qubits)
    return arr


def run_gates_density(mats: np.ndarray, gates, num_qubits: int,
                      lam: float | None = None, insertion: str = "gate") -> np.ndarray:
    """Batched density-matrix run over (..., 2^n, 2^n); optional depolarization."""
    dim = 2**num_qubits
    flat = np.ascontiguousarray(mats).reshape(mats.shape[:-2] + (dim * dim,)).copy()
    for g in gates:
        _apply_gate_density_flat(flat, g, num_qubits)
        if lam is not None and insertion == "gate":
            _depolarize_flat_inplace(flat, lam, num_qubits)
    if lam is not None and insertion == "readout":
        _depolarize_flat_inplace(flat, lam, num_qubits)
    return flat.reshape(mats.shape[:-2] + (dim, dim))


# ---------------------------------------------------------------------------
# measurement and reduction


@lru_cache(maxsize=None)
def _one_mask(n: int, q: int) -> np.ndarray:
    idx = np.arange(2**n)
    return (idx >> q) & 1 == 1


def probability_one(arr: np.ndarray, num_qubits: int, qubit: int, density: bool = False) -> np.ndarray:
    """P(|1>) on one qubit for batched amplitudes (..., 2^n) or matrices (..., 2^n, 2^n)."""
    mask = _one_mask(num_qubits, qubit)
    if density:
        diag = np.diagonal(arr, axis1=-2, axis2=-1)
        return np.sum(diag[..., mask].real, axis=-1)
    return np.sum(np.abs(arr[..., mask]) ** 2, axis=-1)


def expectation_z(state: QuantumState, qubit: int) -> float:
    """Probability of the |1> outcome when measuring ``qubit`` in the Z basis."""
    if not 0 <= qubit < state.num_qubits:
        raise ValueError(f"qubit {qubit} out of range")
    if isinstance(state, StateVector):
        return float(probability_one(state.amplitudes, state.num_qubits, qubit))
    return float(probability_one(state.matrix, state.num_qubits, qubit, density=True))


_AXIS_LABELS = "abcdefghijklmnopqrstuvwxyz"


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced state over ``keep`` (kept qubits renumbered 0..k-1 preserving
    their ascending original order)."""
    keep = tuple(keep)
    if not keep:
        raise ValueError("keep list must be non-empty")
    if len(set(keep)) != len(keep):
        raise ValueError("keep list has duplicate qubits")
    n = rho.num_qubits
    for q in keep:
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range")
    keep_sorted = sorted(keep)
    # axis order of the reshaped tensor runs from qubit n-1 down to qubit 0
    row = list(_AXIS_LABELS[:n])
    col = list(_AXIS_LABELS[n:2 * n])
    for q in range(n):
        if q not in keep_sorted:
            col[n - 1 - q] = row[n - 1 - q]
    out_row = [row[n - 1 - q] for q in reversed(keep_sorted)]
    out_col = [col[n - 1 - q] for q in reversed(keep_sorted)]
    subscripts = "".join(row) + "".join(col) + "->" + "".join(out_row) + "".join(out_col)
    tens = rho.matrix.reshape([2] * (2 * n))
    k = len(keep_sorted)
    reduced = np.einsum(subscripts, tens).reshape(2**k, 2**k)
    return DensityMatrix(reduced, k)


# ---------------------------------------------------------------------------
# validity checks (used by tests and the verify suites)


def check_unitary(matrix: np.ndarray, tol: float = 1e-12) -> bool:
    dim = matrix.shape[0]
    return bool(np.max(np.abs(matrix.conj().T @ matrix - np.eye(dim))) <= tol)


def check_density(rho: DensityMatrix, tol: float = 1e-10) -> bool:
    """Hermitian, unit trace, eigenvalues >= -tol."""
    m = rho.matrix
    if np.max(np.abs(m - m.conj().T)) > tol:
        return False
    if abs(np.trace(m).real - 1.0) > tol:
        return False
    return bool(np.min(np.linalg.eigvalsh(m)) >= -tol)
