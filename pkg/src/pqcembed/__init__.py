"""Cost-function-embedded parameterized quantum circuits.

Exact few-qubit simulation, the CNOT and swap-test cost embeddings, qubit /
mixed-state / indexed-superposition dataset encodings, single-ancilla
Hadamard-test gradient estimation, and Adam training with an optional
global depolarizing channel.
"""

from .encoding import (Dataset, EncodedExample, FeatureScaler, build_mixed_state,
                       build_superposition_with_index, encode_dataset, encode_point,
                       iris_dataset, load_csv, normalize_features, sample_ensemble,
                       train_test_split, xor_dataset)
from .model import (GRADIENT_SCALE, Circuit, CircuitBuilder, CostKind, ParamSlot,
                    RegisterLayout, build_gradient_probe, build_iris_ansatz,
                    build_xor_ansatz, circuit_to_text, embed_cost)
from .sim import (DensityMatrix, DepolarizingChannel, Gate, StateVector,
                  apply_depolarizing, apply_gate, basis_state, expectation_z,
                  partial_trace, run_gates, tensor, to_density, zero_state)
from .training import (AdamConfig, EncodingMode, NoiseConfig, TrainingTrace,
                       TrainTask, accuracy, adam_step, evaluate_cost,
                       evaluate_gradient, finite_difference_gradient,
                       mean_squared_error, predictions, train)

__all__ = [name for name in dir() if not name.startswith("_")]
