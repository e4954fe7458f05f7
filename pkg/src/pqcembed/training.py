"""Gradient-based training of cost-embedded circuits.

The cost of a parameter vector is the readout probability of the embedded
circuit on the encoded dataset state; its gradient is assembled from one
Hadamard-test probe circuit per parameter slot. Updates use Adam with bias
correction. Depolarizing noise, when enabled, is applied on the density-
matrix path: after every gate (insertion 'gate', the default) or once
before readout (insertion 'readout').

Metrics recorded per iteration: the (possibly noisy) training cost, the
mean squared error between per-point prediction probabilities and label
bits, and train/test accuracies. Predictions use the bare ansatz and are
evaluated noiselessly; global depolarization shrinks every prediction
toward 1/2 without crossing the 0.5 decision threshold, so the accuracy is
the same quantity the noisy machine would report.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import encoding, sim
from .model import GRADIENT_SCALE, Circuit, CostKind, build_gradient_probe, embed_cost


class EncodingMode(str, Enum):
    PER_POINT = "perpoint"
    MIXED = "mixed"
    SUPERPOSITION = "superposition"


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon_hat: float = 1e-8
    max_iterations: int = 2000
    cost_threshold: float | None = None

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("betas must lie in [0, 1)")


@dataclass
class AdamState:
    step: int
    m: np.ndarray
    v: np.ndarray


def init_adam(dim: int) -> AdamState:
    return AdamState(0, np.zeros(dim), np.zeros(dim))


def adam_step(state: AdamState, params: np.ndarray, gradient: np.ndarray,
              config: AdamConfig) -> tuple[np.ndarray, AdamState]:
    gradient = np.asarray(gradient, dtype=float)
    if gradient.shape != state.m.shape or gradient.shape != np.shape(params):
        raise ValueError("gradient/parameter dimension mismatch")
    t = state.step + 1
    m = config.beta1 * state.m + (1 - config.beta1) * gradient
    v = config.beta2 * state.v + (1 - config.beta2) * gradient**2
    m_hat = m / (1 - config.beta1**t)
    v_hat = v / (1 - config.beta2**t)
    new_params = params - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon_hat)
    return new_params, AdamState(t, m, v)


@dataclass(frozen=True)
class NoiseConfig:
    """Global depolarizing noise model.

    Insertion 'gate' applies the channel after every executed gate and, in
    addition, once per state-preparation rotation (each data and label qubit
    is prepared by one single-qubit rotation; ``prep_rotations=None`` infers
    that count from the circuit layout, an explicit integer overrides it).
    Insertion 'readout' applies the channel exactly once, before readout.
    """

    enabled: bool = False
    lam: float = 1.0
    insertion: str = "gate"
    prep_rotations: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("noise lambda must lie in [0, 1]")
        if self.insertion not in ("gate", "readout"):
            raise ValueError("insertion must be 'gate' or 'readout'")

    @property
    def active(self) -> bool:
        # lambda = 1 is the identity channel; run the exact noiseless path
        return self.enabled and self.lam < 1.0

    def prep_count(self, circuit: Circuit) -> int:
        if self.insertion != "gate":
            return 0
        if self.prep_rotations is not None:
            return self.prep_rotations
        return len(circuit.layout.data) + len(circuit.layout.label)


# ---------------------------------------------------------------------------
# circuit evaluation


def _pad_amplitudes(amps: np.ndarray, num_qubits: int, target: int) -> np.ndarray:
    """Append |0> qubits above the register (zero-pad the high amplitudes)."""
    if target == num_qubits:
        return amps
    shape = amps.shape[:-1] + (2**target,)
    out = np.zeros(shape, dtype=complex)
    out[..., : 2**num_qubits] = amps
    return out


def _pad_density(mats: np.ndarray, num_qubits: int, target: int) -> np.ndarray:
    if target == num_qubits:
        return mats
    dim, big = 2**num_qubits, 2**target
    out = np.zeros(mats.shape[:-2] + (big, big), dtype=complex)
    out[..., :dim, :dim] = mats
    return out


@dataclass
class _Batch:
    """Dataset state at the bare-circuit width: either a batch of pure
    amplitude rows (averaged with equal weight) or one density matrix."""

    amps: np.ndarray | None
    mat: np.ndarray | None
    num_qubits: int

    def readout(self, gates, width: int, qubit: int, noise: NoiseConfig | None,
                prep: int = 0) -> float:
        noisy = noise is not None and noise.active
        if not noisy:
            if self.amps is not None:
                arr = sim.run_gates_amplitudes(_pad_amplitudes(self.amps, self.num_qubits, width), gates, width)
                return float(np.mean(sim.probability_one(arr, width, qubit)))
            mats = sim.run_gates_density(_pad_density(self.mat, self.num_qubits, width), gates, width)
            return float(sim.probability_one(mats, width, qubit, density=True))
        if self.amps is not None:
            padded = _pad_amplitudes(self.amps, self.num_qubits, width)
            mats = padded[..., :, None] * padded[..., None, :].conj()
        else:
            mats = _pad_density(self.mat, self.num_qubits, width)
        if prep:
            # prep rotations happen under the same gate noise; successive
            # global channels compose exactly into one with lam^prep
            mats = sim.depolarize_array(mats, noise.lam**prep, width)
        mats = sim.run_gates_density(mats, gates, width, lam=noise.lam, insertion=noise.insertion)
        return float(np.mean(sim.probability_one(mats, width, qubit, density=True)))


def evaluate_cost(circuit: Circuit, params, input_state: sim.QuantumState,
                  noise: NoiseConfig | None = None) -> float:
    """Readout probability of a cost-embedded circuit on one input state."""
    if circuit.readout is None:
        raise ValueError("circuit has no cost readout; embed a cost function first")
    if input_state.num_qubits != circuit.num_qubits:
        raise ValueError(f"input width {input_state.num_qubits} != circuit width {circuit.num_qubits}")
    gates = circuit.bind(params)
    if noise is not None and noise.active:
        rho = input_state if isinstance(input_state, sim.DensityMatrix) else sim.to_density(input_state)
        channel = sim.DepolarizingChannel(noise.lam, circuit.num_qubits)
        prep = noise.prep_count(circuit)
        if prep:
            rho = sim.apply_depolarizing(rho, sim.DepolarizingChannel(noise.lam**prep, circuit.num_qubits))
        out = sim.run_gates(rho, gates, channel=channel, insertion=noise.insertion)
    else:
        out = sim.run_gates(input_state, gates)
    return sim.expectation_z(out, circuit.readout)


def _probe_gradient(circuit: Circuit, params, batch: _Batch,
                    noise: NoiseConfig | None, scale: float = GRADIENT_SCALE) -> np.ndarray:
    grads = np.empty(circuit.slot_count)
    prep = noise.prep_count(circuit) if noise is not None else 0
    for j, slot in enumerate(circuit.slots):
        probe = build_gradient_probe(circuit, slot.id)
        r = batch.readout(probe.bind(params), probe.num_qubits, probe.readout, noise, prep)
        grads[j] = scale * (r - 0.5)
    return grads


def evaluate_gradient(circuit: Circuit, params, input_state: sim.QuantumState,
                      noise: NoiseConfig | None = None) -> np.ndarray:
    """One probe-circuit readout per parameter slot, mapped to d(cost)/d(theta)."""
    if circuit.readout is None:
        raise ValueError("circuit has no cost readout; embed a cost function first")
    if input_state.num_qubits != circuit.num_qubits:
        raise ValueError(f"input width {input_state.num_qubits} != circuit width {circuit.num_qubits}")
    if isinstance(input_state, sim.StateVector):
        batch = _Batch(input_state.amplitudes[None, :], None, input_state.num_qubits)
    else:
        batch = _Batch(None, input_state.matrix, input_state.num_qubits)
    return _probe_gradient(circuit, np.asarray(params, dtype=float), batch, noise)


def finite_difference_gradient(circuit: Circuit, params, input_state: sim.QuantumState,
                               h: float, noise: NoiseConfig | None = None) -> np.ndarray:
    """Central differences of evaluate_cost; the independent gradient oracle."""
    if h <= 0:
        raise ValueError("finite-difference step h must be positive")
    params = np.asarray(params, dtype=float)
    grads = np.empty(len(params))
    for j in range(len(params)):
        up, down = params.copy(), params.copy()
        up[j] += h
        down[j] -= h
        grads[j] = (evaluate_cost(circuit, up, input_state, noise)
                    - evaluate_cost(circuit, down, input_state, noise)) / (2 * h)
    return grads


# ---------------------------------------------------------------------------
# metrics


def _bare(circuit: Circuit) -> Circuit:
    while circuit.base is not None:
        circuit = circuit.base
    return circuit


def _prediction_rows(circuit: Circuit, dataset: encoding.Dataset) -> np.ndarray:
    """Encoded per-point input states at the bare-ansatz width."""
    circuit = _bare(circuit)
    n_index = len(circuit.layout.index)
    rows = np.stack([encoding.encode_point(ex, n_index).amplitudes
                     for ex in encoding.encode_dataset(dataset)])
    return _pad_amplitudes(rows, dataset.feature_count + 1 + n_index, circuit.num_qubits)


def _predictions_from_rows(circuit: Circuit, params, rows: np.ndarray) -> np.ndarray:
    circuit = _bare(circuit)
    out = sim.run_gates_amplitudes(rows, circuit.bind(params), circuit.num_qubits)
    return sim.probability_one(out, circuit.num_qubits, circuit.layout.output)


def predictions(circuit: Circuit, params, dataset: encoding.Dataset) -> np.ndarray:
    """Per-point P(|1>) on the output qubit of the bare ansatz."""
    return _predictions_from_rows(circuit, params, _prediction_rows(circuit, dataset))


def accuracy(circuit: Circuit, params, dataset: encoding.Dataset) -> float:
    """Fraction of points whose thresholded prediction matches the label;
    a prediction counts as the larger class only when P(|1>) > 0.5."""
    bits = encoding.label_bits(dataset)
    predicted = (predictions(circuit, params, dataset) > 0.5).astype(int)
    return float(np.mean(predicted == bits))


def mean_squared_error(circuit: Circuit, params, dataset: encoding.Dataset) -> float:
    bits = encoding.label_bits(dataset)
    return float(np.mean((predictions(circuit, params, dataset) - bits) ** 2))


# ---------------------------------------------------------------------------
# the training loop


@dataclass
class TrainingTrace:
    iterations: list[int] = field(default_factory=list)
    cost: list[float] = field(default_factory=list)
    mse: list[float] = field(default_factory=list)
    train_accuracy: list[float] = field(default_factory=list)
    test_accuracy: list[float] = field(default_factory=list)
    params: list[np.ndarray] = field(default_factory=list)

    @property
    def final_params(self) -> np.ndarray:
        return self.params[-1]

    @property
    def final_cost(self) -> float:
        return self.cost[-1]

    def rows(self):
        return zip(self.iterations, self.cost, self.mse, self.train_accuracy, self.test_accuracy)


@dataclass
class TrainTask:
    circuit: Circuit  # bare ansatz
    train_data: encoding.Dataset
    cost_kind: CostKind
    mode: EncodingMode
    adam: AdamConfig
    seed: int
    test_data: encoding.Dataset | None = None
    noise: NoiseConfig | None = None
    sample_size: int = 0  # >0: per-iteration random draw (sampled-ensemble mode)


def _dataset_batch(task: TrainTask, examples, n_index: int, width: int) -> _Batch:
    if task.mode == EncodingMode.SUPERPOSITION:
        state = encoding.build_superposition_with_index(task.train_data)
        return _Batch(state.amplitudes[None, :], None, state.num_qubits)
    if task.mode == EncodingMode.MIXED:
        rho = encoding.build_mixed_state(task.train_data, n_index)
        return _Batch(None, rho.matrix, rho.num_qubits)
    rows = np.stack([encoding.encode_point(ex, n_index).amplitudes for ex in examples])
    return _Batch(rows, None, task.train_data.feature_count + 1 + n_index)


def train(task: TrainTask) -> TrainingTrace:
    """Full-batch Adam training; deterministic for a fixed task and seed."""
    rng = np.random.default_rng(task.seed)
    params = rng.uniform(0.0, 2 * np.pi, task.circuit.slot_count)
    embedded = embed_cost(task.circuit, task.cost_kind)
    width = embedded.num_qubits
    n_index = len(task.circuit.layout.index)
    test_data = task.test_data if task.test_data is not None else task.train_data

    sampler = None
    if task.sample_size > 0:
        if task.mode != EncodingMode.PER_POINT:
            raise ValueError("sampled-ensemble training uses the per-point mode")
        sampler = encoding.sample_ensemble(task.train_data, int(rng.integers(2**32)))

    if sampler is None:
        batch = _dataset_batch(task, encoding.encode_dataset(task.train_data), n_index, width)

    train_rows = _prediction_rows(task.circuit, task.train_data)
    train_bits = encoding.label_bits(task.train_data)
    test_rows = _prediction_rows(task.circuit, test_data)
    test_bits = encoding.label_bits(test_data)

    adam_state = init_adam(task.circuit.slot_count)
    trace = TrainingTrace()
    for it in range(1, task.adam.max_iterations + 1):
        if sampler is not None:
            drawn = [next(sampler) for _ in range(task.sample_size)]
            rows = np.stack([encoding.encode_point(ex, n_index).amplitudes for ex in drawn])
            batch = _Batch(rows, None, task.train_data.feature_count + 1 + n_index)
        cost = batch.readout(embedded.bind(params), width, embedded.readout, task.noise,
                             task.noise.prep_count(embedded) if task.noise else 0)
        if not np.isfinite(cost):
            raise RuntimeError(f"cost became non-finite at iteration {it}")
        p_train = _predictions_from_rows(task.circuit, params, train_rows)
        p_test = _predictions_from_rows(task.circuit, params, test_rows)
        trace.iterations.append(it)
        trace.cost.append(cost)
        trace.mse.append(float(np.mean((p_train - train_bits) ** 2)))
        trace.train_accuracy.append(float(np.mean((p_train > 0.5).astype(int) == train_bits)))
        trace.test_accuracy.append(float(np.mean((p_test > 0.5).astype(int) == test_bits)))
        trace.params.append(params.copy())
        if task.adam.cost_threshold is not None and cost < task.adam.cost_threshold:
            break
        if it == task.adam.max_iterations:
            break
        grads = _probe_gradient(embedded, params, batch, task.noise)
        params, adam_state = adam_step(adam_state, params, grads, task.adam)
    return trace
