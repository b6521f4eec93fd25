'''
Shared fixtures of the test suite: the regression kernels and subspace models
every module is checked against.
'''

import numpy as np
import pytest

from innerlab.kernelspace import KernelSpec, build_space, parse_generators
from innerlab.subspace import blaschke_generator, build_submodule, point_zero_submodule
from innerlab.utils.io_ import MATRIX_HEADER

# --- KERNELS ---

@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(42)


@pytest.fixture
def szego_disc():
    ''' Szegő kernel on the disc with room for products of degree 100 polynomials. '''
    return KernelSpec.szego(d=1, N=200)


@pytest.fixture
def szego_ball():
    return KernelSpec.szego(d=2, N=40)

# --- MODELS ---

def blaschke_model(N: int):
    ''' Subspace generated by the Blaschke factor with zero 1/2 on the Szegő disc. '''

    space = build_space(KernelSpec.szego(d=1, N=2 * N), N)
    return build_submodule(space, [blaschke_generator(space, [0.5])], description='b(z) = (z-1/2)/(1-z/2)')


def coordinate_model(N: int):
    ''' Subspace of H_2^2 generated by z1 and z2. '''

    space = build_space(KernelSpec.szego(d=2, N=2 * N), N)
    return build_submodule(space, parse_generators('z1, z2', space), description='z1, z2')


def point_zero_model(N: int, z0=(0.3, -0.2j)):
    ''' Subspace of H_2^2 of the functions vanishing at an interior point. '''

    space = build_space(KernelSpec.szego(d=2, N=2 * N), N)
    return point_zero_submodule(space, z0)


REGRESSION_MODELS = {
    'blaschke'   : blaschke_model,
    'coordinate' : coordinate_model,
    'point-zero' : point_zero_model,
}

# --- ARTIFACTS ---

def read_matrix(path) -> np.ndarray:
    ''' Parse a matrix file written by the `inner` command. '''

    lines = path.read_text().splitlines()
    assert lines[0] == MATRIX_HEADER

    rows, cols = (int(v) for v in lines[1].split()[2:4])
    body = [line.split() for line in lines[3:3 + rows]]

    return np.array([[complex(v) for v in row] for row in body], dtype=np.complex128).reshape(rows, cols)
