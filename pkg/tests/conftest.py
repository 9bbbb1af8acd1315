import numpy as np
import pytest

from spin_povm import build_d_tensor, build_generator_basis


@pytest.fixture(scope="session")
def bases():
    """Generator bases keyed by 2J for the spins the suite exercises."""
    return {two_j: build_generator_basis(f"{two_j}/2") for two_j in range(1, 6)}


@pytest.fixture(scope="session")
def d_tensors(bases):
    return {two_j: build_d_tensor(basis) for two_j, basis in bases.items()}


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
