"""Analytic verification suites: closed-form oracles, gradient cross-checks,
and encoding-equivalence identities.

Every check compares a simulated quantity against an independently coded
formula and reports the worst observed error. The ``gradient_scale``
argument of the gradient checks is a fault-injection hook: passing a wrong
constant must make the suite fail.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np

from . import encoding, sim
from .model import (GRADIENT_SCALE, CircuitBuilder, CostKind, RegisterLayout,
                    build_gradient_probe, build_iris_ansatz, build_xor_ansatz, embed_cost)
from .training import evaluate_cost, finite_difference_gradient


# ---------------------------------------------------------------------------
# closed-form oracles


def cnot_cost_value(alpha: float, beta: int) -> float:
    """CNOT cost from prediction probability and label bit."""
    return (1 - 2 * beta) * alpha + beta


def fredkin_cost_value(rho_output: np.ndarray, phi: np.ndarray) -> float:
    """Swap-test cost: half of one minus the label/prediction overlap."""
    return float((1 - (phi.conj() @ rho_output @ phi)).real / 2)


def cnot_embedding_chain(alpha: float, beta: int, eps: complex):
    """Closed-form states of the CNOT cost pipeline for a single output qubit
    with prediction probability alpha, off-diagonal eps, and label bit beta.
    Returns (rho_0, rho_phi, rho_1, rho_2, rho_output, cost)."""
    a, b, e = alpha, beta, eps
    rho_0 = np.array([[1 - a, -np.conj(e)], [e, a]], dtype=complex)
    rho_phi = np.array([[1 - b, 0], [0, b]], dtype=complex)
    rho_1 = np.kron(rho_0, rho_phi)
    rho_2 = np.array([
        [(1 - a) * (1 - b), 0, -(1 - b) * np.conj(e), 0],
        [0, a * b, 0, b * e],
        [(1 - b) * e, 0, a * (1 - b), 0],
        [0, -b * np.conj(e), 0, (1 - a) * b],
    ], dtype=complex)
    rho_output = np.array([
        [(1 - a) * (1 - b) + a * b, -(1 - b) * np.conj(e) + b * e],
        [(1 - b) * e - b * np.conj(e), a * (1 - b) + (1 - a) * b],
    ], dtype=complex)
    return rho_0, rho_phi, rho_1, rho_2, rho_output, cnot_cost_value(a, b)


# ---------------------------------------------------------------------------
# check plumbing


@dataclass
class CheckResult:
    name: str
    max_error: float
    bound: float
    invert: bool = False  # True: pass when max_error exceeds the bound

    @property
    def passed(self) -> bool:
        return self.max_error > self.bound if self.invert else self.max_error <= self.bound

    def line(self) -> str:
        op = ">" if self.invert else "<="
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: max_error={self.max_error:.3e} (required {op} {self.bound:.0e})"


def _random_product_input(rng: np.random.Generator, circuit, beta: int | None = None):
    """Random qubit-encoded input at the circuit's full width; returns the
    state and the example used."""
    n_feat = len(circuit.layout.data)
    angles = tuple(rng.uniform(0.0, pi / 2, n_feat).tolist())
    bit = int(rng.integers(2)) if beta is None else beta
    ex = encoding.EncodedExample(angles, bit, 0)
    state = encoding.encode_point(ex, len(circuit.layout.index))
    amps = np.zeros(2**circuit.num_qubits, dtype=complex)
    amps[: len(state.amplitudes)] = state.amplitudes
    return sim.StateVector(amps, circuit.num_qubits), ex


# ---------------------------------------------------------------------------
# oracle suite


def check_cnot_cost_oracle(cases: int = 200, seed: int = 20) -> CheckResult:
    """Embedded CNOT-cost readout vs (1-2b)a + b, with a measured on the
    bare ansatz."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(cases):
        ansatz = build_xor_ansatz() if i % 2 == 0 else build_iris_ansatz()
        emb = embed_cost(ansatz, CostKind.CNOT)
        params = rng.uniform(0, 2 * pi, ansatz.slot_count)
        state, ex = _random_product_input(rng, emb)
        bare = sim.run_gates(state, ansatz.bind(params))
        alpha = sim.expectation_z(bare, ansatz.layout.output)
        got = evaluate_cost(emb, params, state)
        worst = max(worst, abs(got - cnot_cost_value(alpha, ex.label_bit)))
    return CheckResult("cnot cost readout equals (1-2b)a+b", worst, 1e-10)


def check_fredkin_cost_oracle(cases: int = 200, seed: int = 21) -> CheckResult:
    """Embedded swap-test readout vs (1 - <phi|rho_out|phi>)/2 with a random
    pure label state."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(cases):
        ansatz = build_xor_ansatz(num_index_qubits=0) if i % 2 == 0 else build_iris_ansatz()
        emb = embed_cost(ansatz, CostKind.FREDKIN)
        params = rng.uniform(0, 2 * pi, ansatz.slot_count)
        phi = rng.normal(size=2) + 1j * rng.normal(size=2)
        phi /= np.linalg.norm(phi)
        n_data = len(ansatz.layout.data)
        data, _ = _random_product_input(rng, ansatz, beta=0)
        data_amps = data.amplitudes.reshape(2, -1)[0]  # strip the |0> label qubit
        amps = np.kron(phi, data_amps)
        state = sim.StateVector(np.kron(np.array([1, 0]), amps), emb.num_qubits)
        out = sim.run_gates(sim.StateVector(amps, n_data + 1), ansatz.bind(params))
        rho_out = sim.partial_trace(sim.to_density(out), [ansatz.layout.output]).matrix
        got = evaluate_cost(emb, params, state)
        worst = max(worst, abs(got - fredkin_cost_value(rho_out, phi)))
    return CheckResult("fredkin cost readout equals (1-<phi|rho|phi>)/2", worst, 1e-10)


def check_embedding_chain_replay(cases: int = 100, seed: int = 22) -> CheckResult:
    """The simulated CNOT embedding reproduces the closed-form intermediate
    states rho_1, rho_2, rho_output entrywise."""
    rng = np.random.default_rng(seed)
    layout = RegisterLayout(data=(1,), label=(0,), output=1)
    emb = embed_cost(CircuitBuilder(layout).build(), CostKind.CNOT)
    worst = 0.0
    for _ in range(cases):
        alpha = rng.uniform(0, 1)
        beta = int(rng.integers(2))
        mag = rng.uniform(0, np.sqrt(alpha * (1 - alpha)))
        eps = mag * np.exp(2j * pi * rng.uniform())
        rho_0, rho_phi, rho_1, rho_2, rho_out, cost = cnot_embedding_chain(alpha, beta, eps)
        sim_rho_1 = sim.tensor(sim.density_matrix(rho_phi), sim.density_matrix(rho_0))
        worst = max(worst, float(np.max(np.abs(sim_rho_1.matrix - rho_1))))
        sim_rho_2 = sim.run_gates(sim_rho_1, emb.bind([]))
        worst = max(worst, float(np.max(np.abs(sim_rho_2.matrix - rho_2))))
        sim_out = sim.partial_trace(sim_rho_2, [1])
        worst = max(worst, float(np.max(np.abs(sim_out.matrix - rho_out))))
        worst = max(worst, abs(sim.expectation_z(sim_rho_2, 1) - cost))
    return CheckResult("closed-form CNOT embedding chain (rho_1, rho_2, rho_output)", worst, 1e-12)


# ---------------------------------------------------------------------------
# gradient suite


def check_gradient_probe(points: int = 3, seed: int = 23,
                         gradient_scale: float = GRADIENT_SCALE) -> CheckResult:
    """Probe gradient vs central finite differences on every slot of both
    ansatz circuits."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for ansatz in (build_xor_ansatz(), build_iris_ansatz()):
        for kind in (CostKind.CNOT, CostKind.FREDKIN):
            emb = embed_cost(ansatz, kind)
            for _ in range(points):
                params = rng.uniform(0, 2 * pi, ansatz.slot_count)
                state, _ = _random_product_input(rng, emb)
                fd = finite_difference_gradient(emb, params, state, h=1e-5)
                amps = np.zeros(2 ** (emb.num_qubits + 1), dtype=complex)
                amps[: len(state.amplitudes)] = state.amplitudes
                for j, slot in enumerate(emb.slots):
                    probe = build_gradient_probe(emb, slot.id)
                    out = sim.run_gates(sim.StateVector(amps, probe.num_qubits), probe.bind(params))
                    got = gradient_scale * (sim.expectation_z(out, probe.readout) - 0.5)
                    worst = max(worst, abs(got - fd[j]))
    return CheckResult("probe gradient matches finite differences", worst, 1e-6)


def _random_small_circuit(rng: np.random.Generator):
    """Random 2-3 qubit ansatz over the supported gate vocabulary with one
    or more parameter slots."""
    n_data = int(rng.integers(1, 3))
    layout = RegisterLayout(data=tuple(range(n_data)), label=(n_data,),
                            output=int(rng.integers(n_data)))
    b = CircuitBuilder(layout)
    n_slots = 0
    for pos in range(int(rng.integers(2, 7))):
        choice = rng.integers(4)
        q = int(rng.integers(n_data))
        if choice == 0:
            b.add(sim.h(q))
        elif choice == 1 and n_data > 1:
            qq = int(rng.integers(n_data))
            if qq != q:
                b.add(sim.cnot(q, qq))
        else:
            pauli = ("x", "y", "z")[int(rng.integers(3))]
            b.add_rotation(pauli, q, f"s{pos}")
            n_slots += 1
    if n_slots == 0:
        b.add_rotation("x", 0, "s_last")
    return b.build()


def check_gradient_scale_constant(circuits: int = 50, seed: int = 24,
                                  gradient_scale: float = GRADIENT_SCALE) -> CheckResult:
    """The ratio of finite-difference derivative to centered probe readout is
    one constant across random circuits, and equals the calibrated scale."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    checked = 0
    while checked < circuits:
        ansatz = _random_small_circuit(rng)
        kind = CostKind.CNOT if rng.integers(2) == 0 else CostKind.FREDKIN
        emb = embed_cost(ansatz, kind)
        params = rng.uniform(0, 2 * pi, ansatz.slot_count)
        state, _ = _random_product_input(rng, emb)
        fd = finite_difference_gradient(emb, params, state, h=1e-5)
        amps = np.zeros(2 ** (emb.num_qubits + 1), dtype=complex)
        amps[: len(state.amplitudes)] = state.amplitudes
        signals = []
        for j, slot in enumerate(emb.slots):
            probe = build_gradient_probe(emb, slot.id)
            out = sim.run_gates(sim.StateVector(amps, probe.num_qubits), probe.bind(params))
            signals.append((sim.expectation_z(out, probe.readout) - 0.5, fd[j]))
        usable = [(s, d) for s, d in signals if abs(s) > 1e-3]
        if not usable:
            continue
        for s, d in usable:
            worst = max(worst, abs(d / s - gradient_scale))
        checked += 1
    return CheckResult("gradient calibration constant across random circuits", worst, 1e-4)


# ---------------------------------------------------------------------------
# encoding suite


def _xor_mixed_and_perpoint_costs(params, kind: CostKind):
    ds = encoding.xor_dataset()
    ansatz = build_xor_ansatz()
    emb = embed_cost(ansatz, kind)
    n_index = len(ansatz.layout.index)
    per_point = []
    for ex in encoding.encode_dataset(ds):
        state = encoding.encode_point(ex, n_index)
        amps = np.zeros(2**emb.num_qubits, dtype=complex)
        amps[: len(state.amplitudes)] = state.amplitudes
        per_point.append(evaluate_cost(emb, params, sim.StateVector(amps, emb.num_qubits)))
    rho = encoding.build_mixed_state(ds, n_index)
    mat = np.zeros((2**emb.num_qubits,) * 2, dtype=complex)
    mat[: rho.matrix.shape[0], : rho.matrix.shape[1]] = rho.matrix
    mixed = evaluate_cost(emb, params, sim.DensityMatrix(mat, emb.num_qubits))
    return np.mean(per_point), mixed, emb


def check_mixed_linearity(reps: int = 20, seed: int = 25) -> CheckResult:
    """Cost of the exact mixed state equals the mean of per-point costs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(reps):
        kind = CostKind.CNOT if rng.integers(2) == 0 else CostKind.FREDKIN
        params = rng.uniform(0, 2 * pi, 9)
        mean_cost, mixed_cost, _ = _xor_mixed_and_perpoint_costs(params, kind)
        worst = max(worst, abs(mean_cost - mixed_cost))
    return CheckResult("mixed-state cost equals mean per-point cost", worst, 1e-12)


def check_superposition_equivalence(reps: int = 20, seed: int = 26) -> CheckResult:
    """Indexed superposition cost equals the mixed-state cost on XOR."""
    rng = np.random.default_rng(seed)
    ds = encoding.xor_dataset()
    worst = 0.0
    for _ in range(reps):
        kind = CostKind.CNOT if rng.integers(2) == 0 else CostKind.FREDKIN
        params = rng.uniform(0, 2 * pi, 9)
        _, mixed_cost, emb = _xor_mixed_and_perpoint_costs(params, kind)
        state = encoding.build_superposition_with_index(ds)
        amps = np.zeros(2**emb.num_qubits, dtype=complex)
        amps[: len(state.amplitudes)] = state.amplitudes
        sup = evaluate_cost(emb, params, sim.StateVector(amps, emb.num_qubits))
        worst = max(worst, abs(sup - mixed_cost))
    return CheckResult("indexed superposition cost equals mixed cost", worst, 1e-12)


def check_no_index_counterexample(seed: int = 4) -> CheckResult:
    """Without index qubits the coherent cross terms survive: the bare
    superposition cost differs from the dataset-average cost."""
    rng = np.random.default_rng(seed)
    ds = encoding.xor_dataset()
    ansatz = build_xor_ansatz(num_index_qubits=0)
    emb = embed_cost(ansatz, CostKind.CNOT)
    params = rng.uniform(0, 2 * pi, 9)
    examples = encoding.encode_dataset(ds)
    points = [encoding.encode_point(ex).amplitudes for ex in examples]
    bare_sup = sim.StateVector(sum(points) / 2.0, emb.num_qubits)
    sup_cost = evaluate_cost(emb, params, bare_sup)
    mean_cost = np.mean([
        evaluate_cost(emb, params, sim.StateVector(p, emb.num_qubits)) for p in points
    ])
    return CheckResult("no-index superposition disagrees with mean cost",
                       abs(sup_cost - mean_cost), 1e-3, invert=True)


def check_normalization_idempotent() -> CheckResult:
    ds = encoding.normalize_features(encoding.iris_dataset(classes=(1, 2)))
    again = encoding.normalize_features(ds)
    return CheckResult("feature normalization is idempotent",
                       float(np.max(np.abs(again.features - ds.features))), 1e-12)


# ---------------------------------------------------------------------------
# suite registry


def run_suite(name: str, gradient_scale: float = GRADIENT_SCALE) -> list[CheckResult]:
    if name == "oracles":
        return [check_cnot_cost_oracle(), check_fredkin_cost_oracle(), check_embedding_chain_replay()]
    if name == "gradients":
        return [check_gradient_probe(gradient_scale=gradient_scale),
                check_gradient_scale_constant(gradient_scale=gradient_scale)]
    if name == "encodings":
        return [check_mixed_linearity(), check_superposition_equivalence(),
                check_no_index_counterexample(), check_normalization_idempotent()]
    raise ValueError(f"unknown suite {name!r}; choose oracles, gradients, or encodings")


SUITE_NAMES = ("oracles", "gradients", "encodings")
