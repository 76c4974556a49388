import numpy as np
import pytest

from declat import generators
from declat.mesh import classify_boundary
from declat.whitney import WhitneyBasis


@pytest.fixture(scope="session")
def single_tet():
    return generators.single_tet()


@pytest.fixture(scope="session")
def kuhn():
    return generators.kuhn_cube()


@pytest.fixture(scope="session")
def box3():
    return generators.box_mesh(3)


@pytest.fixture(scope="session")
def annulus8():
    return generators.annulus_mesh(8)


@pytest.fixture(scope="session")
def jittered3():
    return generators.jittered_box_mesh(3, seed=5)


@pytest.fixture(scope="session")
def all_meshes(single_tet, kuhn, box3, annulus8, jittered3):
    return {
        "single_tet": single_tet,
        "kuhn": kuhn,
        "box3": box3,
        "annulus8": annulus8,
        "jittered3": jittered3,
    }


@pytest.fixture(scope="session")
def basis_of():
    cache = {}

    def get(mesh) -> WhitneyBasis:
        key = id(mesh)
        if key not in cache:
            cache[key] = WhitneyBasis(mesh)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def classification_of():
    cache = {}

    def get(mesh):
        key = id(mesh)
        if key not in cache:
            cache[key] = classify_boundary(mesh)
        return cache[key]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
