import numpy as np
import pytest

from pqcembed import encoding, sim, training
from pqcembed.model import CostKind, build_xor_ansatz, embed_cost
from pqcembed.training import (AdamConfig, EncodingMode, NoiseConfig, TrainTask,
                               accuracy, adam_step, evaluate_cost,
                               evaluate_gradient, finite_difference_gradient,
                               init_adam, mean_squared_error, train)


def test_adam_zero_gradient_keeps_params():
    cfg = AdamConfig(learning_rate=0.1)
    params = np.array([0.3, -0.2])
    new, state = adam_step(init_adam(2), params, np.zeros(2), cfg)
    assert np.array_equal(new, params)
    assert state.step == 1


def test_adam_first_step_is_signed_learning_rate(rng):
    cfg = AdamConfig(learning_rate=1e-3)
    g = rng.normal(size=4)
    params = np.zeros(4)
    new, _ = adam_step(init_adam(4), params, g, cfg)
    assert np.allclose(new, -np.sign(g) * cfg.learning_rate, atol=1e-6)


def test_adam_constant_gradient_drifts_monotonically():
    cfg = AdamConfig(learning_rate=0.01)
    params = np.zeros(1)
    state = init_adam(1)
    history = [params[0]]
    for _ in range(50):
        params, state = adam_step(state, params, np.array([2.5]), cfg)
        history.append(params[0])
    assert all(b < a for a, b in zip(history, history[1:]))


def test_adam_dimension_mismatch():
    cfg = AdamConfig(learning_rate=0.1)
    with pytest.raises(ValueError, match="dimension"):
        adam_step(init_adam(2), np.zeros(2), np.zeros(3), cfg)


def test_adam_config_validation():
    with pytest.raises(ValueError):
        AdamConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        AdamConfig(learning_rate=0.1, beta1=1.0)


def test_noise_config_validation():
    with pytest.raises(ValueError):
        NoiseConfig(enabled=True, lam=1.2)
    with pytest.raises(ValueError):
        NoiseConfig(enabled=True, lam=0.9, insertion="between")
    assert not NoiseConfig(enabled=True, lam=1.0).active  # identity channel


def _xor_setup(kind=CostKind.CNOT):
    ansatz = build_xor_ansatz()
    emb = embed_cost(ansatz, kind)
    state = encoding.build_superposition_with_index(encoding.xor_dataset())
    amps = np.zeros(2**emb.num_qubits, dtype=complex)
    amps[: len(state.amplitudes)] = state.amplitudes
    return emb, sim.StateVector(amps, emb.num_qubits)


def test_evaluate_cost_width_mismatch():
    emb, _ = _xor_setup()
    with pytest.raises(ValueError, match="width"):
        evaluate_cost(emb, np.zeros(9), sim.zero_state(3))


def test_cost_zero_for_matched_trivial_dataset():
    # labels equal to the (digital) predictions of the zero-parameter circuit
    ds = encoding.Dataset(np.array([[0.0, 0.0], [1.0, 1.0]]), np.array([0, 0]))
    emb = embed_cost(build_xor_ansatz(), CostKind.CNOT)
    for ex in encoding.encode_dataset(ds):
        st = encoding.encode_point(ex, 2)
        amps = np.zeros(2**emb.num_qubits, dtype=complex)
        amps[: len(st.amplitudes)] = st.amplitudes
        cost = evaluate_cost(emb, np.zeros(9), sim.StateVector(amps, emb.num_qubits))
        assert abs(cost) < 1e-12


def test_full_depolarization_gives_half(rng):
    emb, state = _xor_setup()
    cost = evaluate_cost(emb, rng.uniform(0, 2 * np.pi, 9), state,
                         noise=NoiseConfig(enabled=True, lam=0.0))
    assert abs(cost - 0.5) < 1e-12


def test_noise_monotonicity_before_readout(rng):
    # single application before readout: cost(lam) is affine toward 1/2
    emb, state = _xor_setup()
    params = rng.uniform(0, 2 * np.pi, 9)
    clean = evaluate_cost(emb, params, state)
    for lam in (0.99, 0.9, 0.5, 0.1):
        noisy = evaluate_cost(emb, params, state,
                              noise=NoiseConfig(enabled=True, lam=lam, insertion="readout"))
        assert abs(noisy - (lam * clean + (1 - lam) * 0.5)) < 1e-10


def test_per_gate_noise_affine_identity(rng):
    # per-gate global depolarization (incl. one channel application per
    # state-prep rotation) folds into lam^(g + prep) exactly
    emb, state = _xor_setup()
    params = rng.uniform(0, 2 * np.pi, 9)
    clean = evaluate_cost(emb, params, state)
    lam = 0.95
    g = len(emb.gates) + 3  # 2 data + 1 label prep rotations
    noisy = evaluate_cost(emb, params, state, noise=NoiseConfig(enabled=True, lam=lam))
    assert abs(noisy - (lam**g * clean + (1 - lam**g) * 0.5)) < 1e-12


def test_prep_noise_override(rng):
    emb, state = _xor_setup()
    params = rng.uniform(0, 2 * np.pi, 9)
    clean = evaluate_cost(emb, params, state)
    lam = 0.95
    g = len(emb.gates)
    noisy = evaluate_cost(emb, params, state,
                          noise=NoiseConfig(enabled=True, lam=lam, prep_rotations=0))
    assert abs(noisy - (lam**g * clean + (1 - lam**g) * 0.5)) < 1e-12


def test_lambda_one_equals_noiseless(rng):
    emb, state = _xor_setup()
    params = rng.uniform(0, 2 * np.pi, 9)
    a = evaluate_cost(emb, params, state)
    b = evaluate_cost(emb, params, state, noise=NoiseConfig(enabled=True, lam=1.0))
    assert a == b


def test_probe_matches_fd_at_every_iteration_of_a_run():
    task = TrainTask(circuit=build_xor_ansatz(), train_data=encoding.xor_dataset(),
                     cost_kind=CostKind.CNOT, mode=EncodingMode.SUPERPOSITION,
                     adam=AdamConfig(learning_rate=0.05, max_iterations=50), seed=3)
    trace = train(task)
    emb, state = _xor_setup()
    worst = 0.0
    for params in trace.params:
        probe = evaluate_gradient(emb, params, state)
        fd = finite_difference_gradient(emb, params, state, h=1e-5)
        worst = max(worst, float(np.max(np.abs(probe - fd))))
    assert worst <= 1e-6


def test_gradients_identical_across_encodings(rng):
    # exhaustive per-point, exact mixed, and indexed superposition inputs
    # yield the same gradient vector
    ansatz = build_xor_ansatz()
    emb = embed_cost(ansatz, CostKind.CNOT)
    ds = encoding.xor_dataset()
    params = rng.uniform(0, 2 * np.pi, 9)

    def pad(state):
        amps = np.zeros(2**emb.num_qubits, dtype=complex)
        amps[: len(state.amplitudes)] = state.amplitudes
        return sim.StateVector(amps, emb.num_qubits)

    per_point = np.mean([
        evaluate_gradient(emb, params, pad(encoding.encode_point(ex, 2)))
        for ex in encoding.encode_dataset(ds)
    ], axis=0)
    rho = encoding.build_mixed_state(ds, 2)
    mixed = evaluate_gradient(emb, params, sim.DensityMatrix(
        training._pad_density(rho.matrix, rho.num_qubits, emb.num_qubits), emb.num_qubits))
    sup = evaluate_gradient(emb, params, pad(encoding.build_superposition_with_index(ds)))
    assert np.max(np.abs(per_point - mixed)) <= 1e-10
    assert np.max(np.abs(sup - mixed)) <= 1e-10


def test_training_encoding_invariance():
    # identical seeds: per-point, exact mixed, and indexed superposition give
    # the same parameter trajectory
    traces = {}
    for mode in EncodingMode:
        task = TrainTask(circuit=build_xor_ansatz(), train_data=encoding.xor_dataset(),
                         cost_kind=CostKind.CNOT, mode=mode,
                         adam=AdamConfig(learning_rate=0.01, max_iterations=60), seed=5)
        traces[mode] = train(task)
    base = traces[EncodingMode.SUPERPOSITION]
    for mode in (EncodingMode.PER_POINT, EncodingMode.MIXED):
        diff = max(float(np.max(np.abs(a - b)))
                   for a, b in zip(base.params, traces[mode].params))
        assert diff <= 1e-8, f"{mode}: {diff}"


def test_training_determinism():
    def run():
        task = TrainTask(circuit=build_xor_ansatz(), train_data=encoding.xor_dataset(),
                         cost_kind=CostKind.FREDKIN, mode=EncodingMode.SUPERPOSITION,
                         adam=AdamConfig(learning_rate=0.02, max_iterations=40), seed=9)
        return train(task)

    a, b = run(), run()
    assert a.cost == b.cost
    assert a.mse == b.mse
    assert a.train_accuracy == b.train_accuracy
    assert all(np.array_equal(x, y) for x, y in zip(a.params, b.params))


def test_gradient_norm_small_at_converged_optimum():
    task = TrainTask(circuit=build_xor_ansatz(), train_data=encoding.xor_dataset(),
                     cost_kind=CostKind.CNOT, mode=EncodingMode.SUPERPOSITION,
                     adam=AdamConfig(learning_rate=0.05, max_iterations=3000,
                                     cost_threshold=1e-8), seed=3)
    trace = train(task)
    assert trace.final_cost < 1e-8
    emb, state = _xor_setup()
    grad = evaluate_gradient(emb, trace.final_params, state)
    assert np.linalg.norm(grad) <= 1e-3


def test_sampled_ensemble_training_runs():
    task = TrainTask(circuit=build_xor_ansatz(), train_data=encoding.xor_dataset(),
                     cost_kind=CostKind.CNOT, mode=EncodingMode.PER_POINT,
                     adam=AdamConfig(learning_rate=0.02, max_iterations=15), seed=2,
                     sample_size=2)
    a, b = train(task), train(task)
    assert a.cost == b.cost  # seeded draws reproduce
    assert len(a.cost) == 15


def test_sampled_mode_requires_per_point():
    task = TrainTask(circuit=build_xor_ansatz(), train_data=encoding.xor_dataset(),
                     cost_kind=CostKind.CNOT, mode=EncodingMode.MIXED,
                     adam=AdamConfig(learning_rate=0.02, max_iterations=5), seed=2,
                     sample_size=3)
    with pytest.raises(ValueError, match="per-point"):
        train(task)


def test_mse_definition(rng):
    circ = build_xor_ansatz()
    ds = encoding.xor_dataset()
    params = rng.uniform(0, 2 * np.pi, 9)
    p1 = training.predictions(circ, params, ds)
    bits = encoding.label_bits(ds)
    assert mean_squared_error(circ, params, ds) == pytest.approx(np.mean((p1 - bits) ** 2))


def test_accuracy_counts_and_tie_break():
    circ = build_xor_ansatz()
    # zero parameters leave a bare CNOT, which already computes XOR
    ds = encoding.xor_dataset()
    p1 = training.predictions(circ, np.zeros(9), ds)
    assert np.allclose(p1, [0, 1, 1, 0])
    assert accuracy(circ, np.zeros(9), ds) == 1.0
    assert mean_squared_error(circ, np.zeros(9), ds) == pytest.approx(0.0)
    # P(|1>) = 0.5 exactly resolves to the smaller class (bit 0)
    even = encoding.Dataset(np.array([[0.0, np.pi / 4]]), np.array([1]))
    params = np.zeros(9)
    p = training.predictions(circ, params, even)
    assert p[0] == pytest.approx(0.5)
    assert accuracy(circ, params, even) == 0.0


def test_accuracy_uses_bare_ansatz_for_embedded_circuit():
    emb = embed_cost(build_xor_ansatz(), CostKind.CNOT)
    ds = encoding.xor_dataset()
    assert accuracy(emb, np.zeros(9), ds) == accuracy(build_xor_ansatz(), np.zeros(9), ds)


def test_trace_iterations_strictly_increase():
    task = TrainTask(circuit=build_xor_ansatz(), train_data=encoding.xor_dataset(),
                     cost_kind=CostKind.CNOT, mode=EncodingMode.SUPERPOSITION,
                     adam=AdamConfig(learning_rate=0.02, max_iterations=10), seed=1)
    trace = train(task)
    assert trace.iterations == list(range(1, 11))
    assert all(np.isfinite(c) for c in trace.cost)
