import numpy as np
import pytest

from alphaflow import meshes


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def tetra():
    return meshes.tetrahedron()


@pytest.fixture
def torus():
    return meshes.torus7()


@pytest.fixture
def octa():
    return meshes.octahedron()


@pytest.fixture
def simplex4():
    return meshes.boundary_4simplex()
