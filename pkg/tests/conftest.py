import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from zpint.surface import build_embedding_functions, line_bundle, torus_surface

TAU = 0.3 + 0.9j


@pytest.fixture(scope="session")
def torus():
    return torus_surface(TAU)


@pytest.fixture(scope="session")
def bundle():
    return line_bundle(0.21, 0.37)


@pytest.fixture(scope="session")
def bundle2():
    return line_bundle(0.72, 0.11)


@pytest.fixture(scope="session")
def embedding(torus):
    return build_embedding_functions(torus, 0.13 + 0.21j, 0.52 + 0.64j, 0.77 + 0.18j)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
