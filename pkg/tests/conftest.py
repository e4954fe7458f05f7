import numpy as np
import pytest

from pqcembed import sim


def random_gate(rng: np.random.Generator, n: int) -> sim.Gate:
    kinds = ["h", "x", "z", "rot", "cnot", "cz", "cpauli"]
    if n >= 3:
        kinds.append("cswap")
    kind = rng.choice(kinds)
    qs = rng.permutation(n)
    if kind in ("h", "x", "z"):
        return sim.Gate(kind, (int(qs[0]),))
    if kind == "rot":
        pauli = str(rng.choice(["x", "y", "z"]))
        return sim.rotation(pauli, int(qs[0]), float(rng.uniform(0, 2 * np.pi)))
    if kind == "cnot":
        return sim.cnot(int(qs[0]), int(qs[1]))
    if kind == "cz":
        return sim.cz(int(qs[0]), int(qs[1]))
    if kind == "cpauli":
        pauli = str(rng.choice(["x", "y", "z"]))
        return sim.controlled_pauli(pauli, int(qs[0]), int(qs[1]))
    return sim.cswap(int(qs[0]), int(qs[1]), int(qs[2]))


def random_gate_sequence(rng: np.random.Generator, n: int, count: int) -> list[sim.Gate]:
    return [random_gate(rng, n) for _ in range(count)]


def random_pure_state(rng: np.random.Generator, n: int) -> sim.StateVector:
    amps = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return sim.StateVector(amps / np.linalg.norm(amps), n)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
