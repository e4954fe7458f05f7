"""Circuit representation, ansatz builders, cost embedding, gradient probes.

A :class:`Circuit` is an immutable gate list over a register with role
annotations plus named parameter slots. Binding a full parameter vector
produces a concrete gate sequence for the simulator.

The two cost embeddings follow the package conventions (see ``sim``):

* CNOT cost: flip the output qubit conditioned on the label qubit; the cost
  is then P(|1>) on the output qubit, equal to ``(1-2b)*a + b`` for
  prediction probability ``a`` and label bit ``b``.
* Fredkin cost: swap-test the output qubit against the label qubit via an
  ancilla; the cost is P(|1>) on the ancilla, equal to
  ``(1 - <phi|rho_out|phi>)/2``.

Gradient probes implement the single-ancilla Hadamard-test circuit: H on a
fresh probe qubit, a controlled-P inserted right after the probed rotation,
a controlled-Z onto the cost readout qubit, then H and a half-pi Bloch
rotation about X on the probe. Under the ``exp(i*theta*P)`` convention a
Bloch rotation by pi/2 is the gate ``rotation('x', q, pi/4)`` (the Bloch
angle is twice the gate argument). The probe measurement maps to the
derivative as ``GRADIENT_SCALE * (P(|1>) - 1/2)``; the scale is pinned by
the calibration test in the test suite.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from math import pi

import numpy as np

from . import sim
from .sim import Gate

# Probe post-rotation: Bloch half-pi about X, gate argument pi/4 under exp(i t X).
PROBE_ROTATION_ANGLE = pi / 4

# d(cost)/d(theta) = GRADIENT_SCALE * (P(|1>)_probe - 1/2).
# Calibrated against central finite differences (see tests/test_gradient.py);
# the sign follows from the +pi/4 probe rotation together with the
# exp(i*theta*P) rotation convention.
GRADIENT_SCALE = -2.0


class CostKind(str, Enum):
    CNOT = "cnot"
    FREDKIN = "fredkin"


@dataclass(frozen=True)
class RegisterLayout:
    """Role assignment for every qubit of the register."""

    data: tuple[int, ...]
    label: tuple[int, ...] = ()
    index: tuple[int, ...] = ()
    ancilla: tuple[int, ...] = ()
    output: int = 0

    def __post_init__(self):
        groups = (self.data, self.label, self.index, self.ancilla)
        all_qubits = [q for g in groups for q in g]
        n = len(all_qubits)
        if sorted(all_qubits) != list(range(n)):
            raise ValueError("register roles must be disjoint and cover 0..n-1")
        if self.output not in self.data:
            raise ValueError("output qubit must be one of the data qubits")

    @property
    def num_qubits(self) -> int:
        return len(self.data) + len(self.label) + len(self.index) + len(self.ancilla)


@dataclass(frozen=True)
class ParamSlot:
    """Named handle onto one rotation gate of the circuit."""

    id: str
    gate_position: int
    pauli: str


@dataclass(frozen=True)
class Circuit:
    layout: RegisterLayout
    gates: tuple[Gate, ...]
    slots: tuple[ParamSlot, ...]
    cost_kind: CostKind | None = None
    readout: int | None = None
    base: "Circuit | None" = None
    probe_slot: str | None = None

    def __post_init__(self):
        n = self.layout.num_qubits
        for g in self.gates:
            if any(q >= n for q in g.qubits):
                raise ValueError("gate addresses a qubit outside the register")
        for s in self.slots:
            g = self.gates[s.gate_position]
            if g.kind != "rot" or g.pauli != s.pauli or g.angle is not None:
                raise ValueError(f"slot {s.id} does not reference an unbound rotation gate")

    @property
    def num_qubits(self) -> int:
        return self.layout.num_qubits

    @property
    def slot_count(self) -> int:
        return len(self.slots)

    def slot(self, slot_id: str) -> ParamSlot:
        for s in self.slots:
            if s.id == slot_id:
                return s
        raise ValueError(f"no parameter slot named {slot_id!r}")

    def bind(self, params) -> tuple[Gate, ...]:
        """Concrete gate sequence with every slot angle filled in."""
        values = np.asarray(params, dtype=float).reshape(-1)
        if len(values) != len(self.slots):
            raise ValueError(f"expected {len(self.slots)} parameters, got {len(values)}")
        gates = list(self.gates)
        for s, v in zip(self.slots, values):
            gates[s.gate_position] = dataclasses.replace(gates[s.gate_position], angle=float(v))
        return tuple(gates)


class CircuitBuilder:
    def __init__(self, layout: RegisterLayout):
        self.layout = layout
        self._gates: list[Gate] = []
        self._slots: list[ParamSlot] = []

    def add(self, gate: Gate) -> None:
        self._gates.append(gate)

    def add_rotation(self, pauli: str, qubit: int, slot_id: str) -> None:
        if any(s.id == slot_id for s in self._slots):
            raise ValueError(f"duplicate slot id {slot_id!r}")
        self._slots.append(ParamSlot(slot_id, len(self._gates), pauli))
        self._gates.append(sim.rotation(pauli, qubit))

    def add_rotation_block(self, qubit: int, prefix: str) -> None:
        """Arbitrary single-qubit rotation: Rx, Rz, Rx with three fresh slots."""
        self.add_rotation("x", qubit, f"{prefix}_rx1")
        self.add_rotation("z", qubit, f"{prefix}_rz")
        self.add_rotation("x", qubit, f"{prefix}_rx2")

    def build(self) -> Circuit:
        return Circuit(self.layout, tuple(self._gates), tuple(self._slots))


def build_xor_ansatz(num_index_qubits: int = 2) -> Circuit:
    """Two-input classifier ansatz: a rotation block on each input qubit,
    a CNOT from input 0 to input 1, then a rotation block on the output
    (input 1). Index qubits ride along untouched."""
    layout = RegisterLayout(
        data=(0, 1),
        label=(2,),
        index=tuple(range(3, 3 + num_index_qubits)),
        output=1,
    )
    b = CircuitBuilder(layout)
    b.add_rotation_block(0, "in0")
    b.add_rotation_block(1, "in1")
    b.add(sim.cnot(0, 1))
    b.add_rotation_block(1, "out")
    return b.build()


def build_iris_ansatz(num_index_qubits: int = 0) -> Circuit:
    """Hierarchical (tree) classifier on four data qubits: rotation blocks on
    all four, pairwise CNOTs into qubits 1 and 2, blocks on the survivors,
    a CNOT merging them into qubit 2, and a final block there. Output is
    qubit 2."""
    layout = RegisterLayout(data=(0, 1, 2, 3), label=(4,),
                            index=tuple(range(5, 5 + num_index_qubits)), output=2)
    b = CircuitBuilder(layout)
    for q in range(4):
        b.add_rotation_block(q, f"l1q{q}")
    b.add(sim.cnot(0, 1))
    b.add(sim.cnot(3, 2))
    b.add_rotation_block(1, "l2q1")
    b.add_rotation_block(2, "l2q2")
    b.add(sim.cnot(1, 2))
    b.add_rotation_block(2, "l3q2")
    return b.build()


def embed_cost(circuit: Circuit, kind: CostKind) -> Circuit:
    """Append the cost-function embedding; the returned circuit knows its
    cost readout qubit and keeps a reference to the bare ansatz."""
    if circuit.cost_kind is not None:
        raise ValueError("circuit already has a cost embedding")
    if not circuit.layout.label:
        raise ValueError("cost embedding requires a label qubit")
    label = circuit.layout.label[0]
    output = circuit.layout.output
    if kind == CostKind.CNOT:
        gates = circuit.gates + (sim.cnot(label, output),)
        return Circuit(circuit.layout, gates, circuit.slots,
                       cost_kind=kind, readout=output, base=circuit)
    if kind == CostKind.FREDKIN:
        if circuit.layout.ancilla:
            anc = circuit.layout.ancilla[0]
            layout = circuit.layout
        else:
            anc = circuit.layout.num_qubits
            layout = dataclasses.replace(circuit.layout, ancilla=circuit.layout.ancilla + (anc,))
        gates = circuit.gates + (sim.h(anc), sim.cswap(anc, output, label), sim.h(anc))
        return Circuit(layout, gates, circuit.slots,
                       cost_kind=kind, readout=anc, base=circuit)
    raise ValueError(f"unknown cost kind {kind!r}")


@lru_cache(maxsize=512)
def build_gradient_probe(circuit: Circuit, slot_id: str) -> Circuit:
    """Hadamard-test circuit measuring d(cost)/d(theta) for one slot on a
    fresh probe qubit appended above the register."""
    if circuit.cost_kind is None:
        raise ValueError("gradient probe requires a cost-embedded circuit")
    slot = circuit.slot(slot_id)
    probe = circuit.num_qubits
    rot = circuit.gates[slot.gate_position]
    p = slot.gate_position
    gates = (
        (sim.h(probe),)
        + circuit.gates[: p + 1]
        + (sim.controlled_pauli(slot.pauli, probe, rot.targets[0]),)
        + circuit.gates[p + 1 :]
        + (sim.cz(probe, circuit.readout), sim.h(probe),
           sim.rotation("x", probe, PROBE_ROTATION_ANGLE))
    )
    slots = tuple(
        dataclasses.replace(s, gate_position=s.gate_position + (1 if s.gate_position <= p else 2))
        for s in circuit.slots
    )
    layout = dataclasses.replace(circuit.layout, ancilla=circuit.layout.ancilla + (probe,))
    return Circuit(layout, gates, slots, cost_kind=circuit.cost_kind,
                   readout=probe, base=circuit, probe_slot=slot_id)


def circuit_to_text(circuit: Circuit) -> str:
    """Line-oriented serialization: one gate per line (kind, qubits, slot id)."""
    lay = circuit.layout
    lines = [
        f"# qubits={circuit.num_qubits} output={lay.output}"
        + (f" readout={circuit.readout}" if circuit.readout is not None else "")
        + (f" cost={circuit.cost_kind.value}" if circuit.cost_kind is not None else ""),
        "# data=" + ",".join(map(str, lay.data))
        + " label=" + ",".join(map(str, lay.label))
        + " index=" + ",".join(map(str, lay.index))
        + " ancilla=" + ",".join(map(str, lay.ancilla)),
    ]
    slot_at = {s.gate_position: s.id for s in circuit.slots}
    for pos, g in enumerate(circuit.gates):
        parts = [g.kind]
        if g.controls:
            parts.append("controls=" + ",".join(map(str, g.controls)))
        parts.append("targets=" + ",".join(map(str, g.targets)))
        if g.pauli is not None:
            parts.append(f"pauli={g.pauli}")
        if g.angle is not None:
            parts.append(f"angle={g.angle!r}")
        if pos in slot_at:
            parts.append(f"slot={slot_at[pos]}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
