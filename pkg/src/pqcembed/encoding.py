"""Classical datasets and their quantum input-state encodings.

Three input-state forms are supported:

* per-point qubit encoding: each normalized feature angle g maps one qubit
  to cos(g)|0> + sin(g)|1>, the label bit rides on a label qubit, and an
  optional index register carries the data-point ordinal as a basis state;
* mixed-state encoding: the uniform classical average of the per-point
  projectors;
* superposition with index: the uniform coherent sum of fully digital
  per-point states, each tagged with an orthogonal index basis state.

Register order (low to high qubit index): data features, label, index.
Fully binary feature tables are treated as digital and use the endpoint
angles {0, pi/2}, i.e. exact basis states.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from math import ceil, log2, pi
from typing import Iterator

import numpy as np

from .sim import DensityMatrix, StateVector

ANGLE_MARGIN = 1e-3  # keeps normalized angles strictly inside (0, pi/2)


@dataclass
class Dataset:
    """Feature rows with integer class labels."""

    features: np.ndarray  # (m, N) float
    labels: np.ndarray  # (m,) int

    def __post_init__(self):
        self.features = np.atleast_2d(np.asarray(self.features, dtype=float))
        self.labels = np.asarray(self.labels, dtype=int).reshape(-1)
        if len(self.features) != len(self.labels):
            raise ValueError("feature rows and labels differ in length")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def feature_count(self) -> int:
        return self.features.shape[1]

    @property
    def class_set(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.labels.tolist())))


def load_csv(path, header: bool = False) -> Dataset:
    """Rows of feature columns followed by one integer label column."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if header:
        rows = rows[1:]
    if not rows:
        raise ValueError(f"no data rows in {path}")
    feats = [[float(v) for v in r[:-1]] for r in rows]
    labels = [int(float(r[-1])) for r in rows]
    return Dataset(np.array(feats), np.array(labels))


def xor_dataset() -> Dataset:
    """The XOR truth table: label 1 iff the two input bits differ."""
    feats = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    return Dataset(feats, np.array([0, 1, 1, 0]))


def iris_dataset(classes: tuple[int, ...] | None = None) -> Dataset:
    """Bundled 150-row Iris table (labels 0, 1, 2), optionally filtered."""
    with resources.files("pqcembed.data").joinpath("iris.csv").open() as fh:
        rows = [r for r in csv.reader(fh) if r]
    ds = Dataset(np.array([[float(v) for v in r[:4]] for r in rows]),
                 np.array([int(r[4]) for r in rows]))
    return ds if classes is None else filter_classes(ds, classes)


def filter_classes(dataset: Dataset, classes) -> Dataset:
    keep = np.isin(dataset.labels, list(classes))
    return Dataset(dataset.features[keep], dataset.labels[keep])


def train_test_split(dataset: Dataset, test_fraction: float, rng: np.random.Generator):
    """Stratified split; each class contributes test_fraction of its rows."""
    test_idx: list[int] = []
    for c in dataset.class_set:
        rows = np.flatnonzero(dataset.labels == c)
        rows = rng.permutation(rows)
        test_idx.extend(rows[: round(len(rows) * test_fraction)].tolist())
    mask = np.zeros(len(dataset), dtype=bool)
    mask[test_idx] = True
    train = Dataset(dataset.features[~mask], dataset.labels[~mask])
    test = Dataset(dataset.features[mask], dataset.labels[mask])
    return train, test


class FeatureScaler:
    """Per-feature affine map onto [margin, pi/2 - margin], fitted on one
    split and reused on the other; out-of-range values are clipped."""

    def __init__(self, margin: float = ANGLE_MARGIN):
        self.margin = margin
        self.lo_: np.ndarray | None = None
        self.hi_: np.ndarray | None = None

    def fit(self, dataset: Dataset) -> "FeatureScaler":
        self.lo_ = dataset.features.min(axis=0)
        self.hi_ = dataset.features.max(axis=0)
        if np.any(self.hi_ - self.lo_ <= 0):
            bad = int(np.argmax(self.hi_ - self.lo_ <= 0))
            raise ValueError(f"feature column {bad} is constant; cannot normalize")
        return self

    def transform(self, dataset: Dataset) -> Dataset:
        if self.lo_ is None:
            raise ValueError("scaler is not fitted")
        lo, hi = self.margin, pi / 2 - self.margin
        scaled = lo + (dataset.features - self.lo_) / (self.hi_ - self.lo_) * (hi - lo)
        return Dataset(np.clip(scaled, lo, hi), dataset.labels)

    def fit_transform(self, dataset: Dataset) -> Dataset:
        return self.fit(dataset).transform(dataset)


def normalize_features(dataset: Dataset) -> Dataset:
    """Fit-and-apply convenience for single-split use."""
    return FeatureScaler().fit_transform(dataset)


def is_digital(dataset: Dataset) -> bool:
    return bool(np.all(np.isin(dataset.features, (0.0, 1.0))))


def label_bits(dataset: Dataset) -> np.ndarray:
    """Binary label bits. Labels already in {0, 1} pass through; any other
    two-class set maps the smaller class to 0 and the larger to 1."""
    classes = dataset.class_set
    if len(classes) > 2:
        raise ValueError(f"binary encoding needs at most 2 classes, got {classes}")
    if set(classes) <= {0, 1}:
        return dataset.labels.astype(int)
    return (dataset.labels == classes[-1]).astype(int)


@dataclass(frozen=True)
class EncodedExample:
    """State-preparation angles plus label bit for one data point."""

    angles: tuple[float, ...]
    label_bit: int
    index: int


def encode_dataset(dataset: Dataset) -> list[EncodedExample]:
    """Feature rows to angle lists. Digital tables map {0,1} to {0, pi/2};
    anything else must already lie in [0, pi/2] (see normalize_features)."""
    bits = label_bits(dataset)
    if is_digital(dataset):
        angles = dataset.features * (pi / 2)
    else:
        if np.any(dataset.features < 0) or np.any(dataset.features > pi / 2):
            raise ValueError("non-digital features must be normalized into [0, pi/2]")
        angles = dataset.features
    return [EncodedExample(tuple(row), int(b), i)
            for i, (row, b) in enumerate(zip(angles.tolist(), bits))]


def encode_point(example: EncodedExample, num_index_qubits: int = 0) -> StateVector:
    """Product state: qubit-encoded features, label basis qubit, and the
    data-point ordinal on the index register (when present)."""
    amps = np.ones(1, dtype=complex)
    for g in example.angles:
        if not 0.0 <= g <= pi / 2:
            raise ValueError(f"encoding angle {g} outside [0, pi/2]")
        amps = np.kron(np.array([np.cos(g), np.sin(g)], dtype=complex), amps)
    label = np.zeros(2, dtype=complex)
    label[example.label_bit] = 1.0
    amps = np.kron(label, amps)
    if num_index_qubits:
        if example.index >= 2**num_index_qubits:
            raise ValueError("index register too narrow for this data point")
        idx = np.zeros(2**num_index_qubits, dtype=complex)
        idx[example.index] = 1.0
        amps = np.kron(idx, amps)
    n = len(example.angles) + 1 + num_index_qubits
    return StateVector(amps, n)


def build_mixed_state(dataset: Dataset, num_index_qubits: int = 0) -> DensityMatrix:
    """Uniform classical mixture of the per-point projectors."""
    if len(dataset) == 0:
        raise ValueError("cannot build a mixed state from an empty dataset")
    examples = encode_dataset(dataset)
    first = encode_point(examples[0], num_index_qubits)
    acc = np.zeros((len(first.amplitudes),) * 2, dtype=complex)
    for ex in examples:
        amps = encode_point(ex, num_index_qubits).amplitudes
        acc += np.outer(amps, amps.conj())
    return DensityMatrix(acc / len(examples), first.num_qubits)


def sample_ensemble(dataset: Dataset, rng_seed: int) -> Iterator[EncodedExample]:
    """Seeded uniform i.i.d. stream over the encoded data points."""
    if len(dataset) == 0:
        raise ValueError("cannot sample from an empty dataset")
    examples = encode_dataset(dataset)
    rng = np.random.default_rng(rng_seed)
    while True:
        yield examples[int(rng.integers(len(examples)))]


def index_width(num_points: int) -> int:
    return ceil(log2(num_points)) if num_points > 1 else 0


def build_superposition_with_index(dataset: Dataset) -> StateVector:
    """Uniform coherent sum over a digital dataset, each point tagged with
    its ordinal on the index register. Datasets whose size is not a power of
    two are padded by repeating rows from the start; the encoded average is
    then the average over the padded multiset."""
    if len(dataset) == 0:
        raise ValueError("cannot encode an empty dataset")
    if not is_digital(dataset):
        raise ValueError("superposition encoding requires fully digital features")
    examples = encode_dataset(dataset)
    width = index_width(len(examples))
    padded = [EncodedExample(examples[i % len(examples)].angles,
                             examples[i % len(examples)].label_bit, i)
              for i in range(2**width)]
    amps = sum(encode_point(ex, width).amplitudes for ex in padded)
    amps = amps / np.sqrt(len(padded))
    n = dataset.feature_count + 1 + width
    return StateVector(amps, n)
