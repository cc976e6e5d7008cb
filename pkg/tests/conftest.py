import numpy as np
import pytest

from mpsprep import Mps


def random_mps(n, chi, rng, scaled=False):
    """Random MPS with bonds capped at chi and the representable maximum."""
    bonds = [min(chi, 2**i, 2 ** (n - i)) for i in range(n + 1)]
    cores = []
    for i in range(n):
        core = rng.standard_normal((bonds[i], 2, bonds[i + 1]))
        if scaled:  # keeps norms finite for long chains
            core /= np.sqrt(2.0 * max(bonds[i], bonds[i + 1]))
        cores.append(core)
    return Mps(cores)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
