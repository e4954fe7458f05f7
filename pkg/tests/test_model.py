from pathlib import Path

import numpy as np
import pytest

from pqcembed import sim, verify
from pqcembed.model import (CircuitBuilder, CostKind, RegisterLayout,
                            build_gradient_probe, build_iris_ansatz,
                            build_xor_ansatz, circuit_to_text, embed_cost)

GOLDEN = Path(__file__).parent / "data" / "iris_circuit.txt"


def _block_circuit():
    layout = RegisterLayout(data=(0,), output=0)
    b = CircuitBuilder(layout)
    b.add_rotation_block(0, "blk")
    return b.build()


def test_rotation_block_zero_angles_is_identity(rng):
    circ = _block_circuit()
    state = sim.StateVector(
        (lambda v: v / np.linalg.norm(v))(rng.normal(size=2) + 1j * rng.normal(size=2)), 1)
    out = sim.run_gates(state, circ.bind([0, 0, 0]))
    assert np.allclose(out.amplitudes, state.amplitudes)


def test_rotation_block_preserves_norm(rng):
    circ = _block_circuit()
    out = sim.run_gates(sim.zero_state(1), circ.bind(rng.uniform(0, 2 * np.pi, 3)))
    assert abs(out.norm() - 1.0) < 1e-12


def test_rotation_block_reaches_one_from_zero():
    # exp(i pi/2 X) = iX maps |0> to i|1>
    circ = _block_circuit()
    out = sim.run_gates(sim.zero_state(1), circ.bind([np.pi / 2, 0, 0]))
    assert abs(out.amplitudes[1]) ** 2 > 1 - 1e-9


def test_xor_ansatz_structure():
    circ = build_xor_ansatz()
    assert circ.slot_count == 9
    assert circ.layout.data == (0, 1)
    assert circ.layout.output == 1
    assert circ.num_qubits == 5  # 2 data + 1 label + 2 index


def test_xor_ansatz_zero_params_fixes_basis():
    circ = build_xor_ansatz()
    out = sim.run_gates(sim.zero_state(5), circ.bind(np.zeros(9)))
    assert abs(out.amplitudes[0] - 1.0) < 1e-12


def _data_subspace_unitary(circ, params, n_data):
    cols = []
    for b in range(2**n_data):
        state = sim.basis_state(circ.num_qubits, b)
        out = sim.run_gates(state, circ.bind(params))
        cols.append(out.amplitudes[: 2**n_data])
    return np.stack(cols, axis=1)


def test_xor_ansatz_unitary_on_data_subspace(rng):
    circ = build_xor_ansatz()
    u = _data_subspace_unitary(circ, rng.uniform(0, 2 * np.pi, 9), 2)
    assert sim.check_unitary(u, tol=1e-12)


def test_iris_ansatz_structure():
    circ = build_iris_ansatz()
    assert circ.slot_count == 21  # 3 * (4 + 2 + 1) rotation blocks
    assert circ.layout.output == 2
    assert circ.num_qubits == 5
    out = sim.run_gates(sim.zero_state(5), circ.bind(np.zeros(21)))
    assert abs(out.amplitudes[0] - 1.0) < 1e-12


def test_iris_ansatz_matches_golden_transcription():
    assert circuit_to_text(build_iris_ansatz()) == GOLDEN.read_text()


def test_layout_validation():
    with pytest.raises(ValueError, match="cover"):
        RegisterLayout(data=(0, 2), output=0)
    with pytest.raises(ValueError, match="output"):
        RegisterLayout(data=(0,), label=(1,), output=1)


def test_cnot_cost_matched_prediction_is_zero():
    layout = RegisterLayout(data=(0,), label=(1,), output=0)
    b = CircuitBuilder(layout)
    b.add(sim.x(0))  # prediction |1>
    emb = embed_cost(b.build(), CostKind.CNOT)
    state = sim.basis_state(2, 0b10)  # label |1>
    out = sim.run_gates(state, emb.bind([]))
    assert abs(sim.expectation_z(out, emb.readout)) < 1e-12


def test_cnot_cost_is_classification_error():
    # digital predictions reduce the cost to the 0/1 error indicator
    for alpha in (0, 1):
        for beta in (0, 1):
            assert verify.cnot_cost_value(alpha, beta) == (1 if alpha != beta else 0)


def test_cnot_cost_oracle_random_cases():
    res = verify.check_cnot_cost_oracle(cases=40, seed=7)
    assert res.passed, res.line()


def test_fredkin_cost_oracle_random_cases():
    res = verify.check_fredkin_cost_oracle(cases=40, seed=8)
    assert res.passed, res.line()


def test_fredkin_cost_on_maximally_mixed_output(rng):
    # entangle the output with a spectator so rho_out = I/2
    layout = RegisterLayout(data=(0, 1), label=(2,), output=1)
    b = CircuitBuilder(layout)
    b.add(sim.h(0))
    b.add(sim.cnot(0, 1))
    emb = embed_cost(b.build(), CostKind.FREDKIN)
    phi = rng.normal(size=2) + 1j * rng.normal(size=2)
    phi /= np.linalg.norm(phi)
    amps = np.kron(np.array([1, 0]), np.kron(phi, sim.zero_state(2).amplitudes))
    out = sim.run_gates(sim.StateVector(amps, 4), emb.bind([]))
    assert abs(sim.expectation_z(out, emb.readout) - 0.25) < 1e-12


def test_embed_cost_requires_label():
    circ = _block_circuit()
    with pytest.raises(ValueError, match="label"):
        embed_cost(circ, CostKind.CNOT)


def test_embed_cost_rejects_double_embedding():
    emb = embed_cost(build_xor_ansatz(), CostKind.CNOT)
    with pytest.raises(ValueError, match="already"):
        embed_cost(emb, CostKind.FREDKIN)


def test_fredkin_embedding_appends_ancilla():
    circ = build_xor_ansatz()
    emb = embed_cost(circ, CostKind.FREDKIN)
    assert emb.num_qubits == circ.num_qubits + 1
    assert emb.readout == circ.num_qubits
    assert emb.base is circ


def test_embedding_chain_replay():
    res = verify.check_embedding_chain_replay(cases=30, seed=9)
    assert res.passed, res.line()


def test_bind_is_deterministic(rng):
    circ = build_xor_ansatz()
    params = rng.uniform(0, 2 * np.pi, 9)
    a = sim.run_gates(sim.zero_state(5), circ.bind(params))
    b = sim.run_gates(sim.zero_state(5), circ.bind(params))
    assert np.array_equal(a.amplitudes, b.amplitudes)


def test_bind_two_pi_periodicity(rng):
    circ = build_xor_ansatz()
    params = rng.uniform(0, 2 * np.pi, 9)
    shifted = params.copy()
    shifted[4] += 2 * np.pi
    a = sim.run_gates(sim.zero_state(5), circ.bind(params))
    b = sim.run_gates(sim.zero_state(5), circ.bind(shifted))
    overlap = abs(np.vdot(a.amplitudes, b.amplitudes))
    assert abs(overlap - 1.0) < 1e-12  # equal up to global phase


def test_bind_partial_params_rejected():
    circ = build_xor_ansatz()
    with pytest.raises(ValueError, match="expected 9"):
        circ.bind(np.zeros(5))


def test_probe_requires_cost_embedding():
    with pytest.raises(ValueError, match="cost-embedded"):
        build_gradient_probe(build_xor_ansatz(), "in0_rx1")


def test_probe_unknown_slot():
    emb = embed_cost(build_xor_ansatz(), CostKind.CNOT)
    with pytest.raises(ValueError, match="no parameter slot"):
        build_gradient_probe(emb, "nope")


def test_probe_slot_remapping(rng):
    emb = embed_cost(build_xor_ansatz(), CostKind.CNOT)
    probe = build_gradient_probe(emb, "out_rz")
    assert probe.num_qubits == emb.num_qubits + 1
    assert probe.readout == emb.num_qubits
    # every slot still points at an unbound rotation with the right pauli
    for s in probe.slots:
        g = probe.gates[s.gate_position]
        assert g.kind == "rot" and g.pauli == s.pauli and g.angle is None


def test_serialization_smoke():
    emb = embed_cost(build_xor_ansatz(), CostKind.FREDKIN)
    text = circuit_to_text(emb)
    assert "cswap" in text and "cost=fredkin" in text
