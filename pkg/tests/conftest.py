import numpy as np
import pytest

from oneway import DensityOperator, PureState, Register


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def haar_state(reg: Register, rng) -> PureState:
    v = rng.normal(size=reg.dim) + 1j * rng.normal(size=reg.dim)
    return PureState(reg, v / np.linalg.norm(v))


def random_density(reg: Register, rng, rank=None) -> DensityOperator:
    k = rank or reg.dim
    G = rng.normal(size=(reg.dim, k)) + 1j * rng.normal(size=(reg.dim, k))
    M = G @ G.conj().T
    return DensityOperator(reg, M / np.trace(M).real)


def bell(a="A", b="B") -> PureState:
    return PureState(Register.of((a, 2), (b, 2)), np.array([1, 0, 0, 1]) / np.sqrt(2))
