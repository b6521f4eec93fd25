from itertools import permutations

import numpy as np
import pytest
from scipy.linalg import svdvals

from conftest import REGRESSION_MODELS, blaschke_model, coordinate_model
from innerlab.curvature import default_sample_points
from innerlab.innermt import (
    boundary_isometry_scan, construct_inner, omitted_b_mass, phi_batch, phi_matrix,
    projection_reproduction_check, q_map, rank_profile, scan_tail, support_degree,
)
from innerlab.kernelspace import KernelSpec, build_space, kernel_tail, parse_generators, sample_sphere
from innerlab.series import CoeffSeq
from innerlab.subspace import build_submodule
from innerlab.utils.errors import NumericalContractError, TruncationBudgetError

BLASCHKE_AT_09 = 0.4 / 0.55

# --- Q MAP ---

def test_q_map_of_identity_on_szego():

    space = build_space(KernelSpec.szego(d=2, N=8), 4)
    Q     = q_map(space, np.eye(space.dim))

    # Σ M_zi M_zi^* is the projection onto the polynomials vanishing at 0
    np.testing.assert_allclose(Q, np.diag([0.] + [1.] * (space.dim - 1)), atol=1e-12)

# --- CONSTRUCTION ---

def test_coordinate_inner_multiplier():

    inner = construct_inner(coordinate_model(10))

    assert inner.rank == 2
    assert support_degree(inner) == 1
    assert inner.clamp_report.min_eigenvalue > -1e-9

    rng = np.random.default_rng(7)

    for lam in 0.9 * sample_sphere(2, 25, rng) * rng.uniform(size=(25, 1)):
        phi = phi_matrix(inner, lam)[0]
        # Entrywise up to the order of the basis of E
        assert min(np.max(np.abs(phi[list(p)] - lam)) for p in permutations(range(2))) <= 1e-8

    values = phi_batch(inner, sample_sphere(2, 100, rng))
    np.testing.assert_allclose(np.sum(np.abs(values) ** 2, axis=(1, 2)), 1., atol=1e-8)


def test_blaschke_boundary_scan():

    inner = construct_inner(blaschke_model(100))
    df    = boundary_isometry_scan(inner, 1, [0.5, 0.9])

    assert inner.rank == 1
    assert list(df.columns) == ['t', 'sigma_1', 'tail_bound']
    assert df['sigma_1'].iloc[-1] == pytest.approx(BLASCHKE_AT_09, abs=1e-6)


def test_boundary_scan_budget():

    with pytest.raises(TruncationBudgetError):
        boundary_isometry_scan(construct_inner(blaschke_model(20)), 1, [0.9])


def test_coordinate_scan_is_radius():

    inner = construct_inner(coordinate_model(8))
    df    = boundary_isometry_scan(inner, [0.6, 0.8], [0.3, 0.6, 0.9])

    np.testing.assert_allclose(df['sigma_1'], df['t'], atol=1e-10)
    assert np.all(df['tail_bound'] <= 1e-20)


def test_scan_tail_of_polynomial_model():

    inner = construct_inner(coordinate_model(8))

    assert support_degree(inner) == 1
    assert scan_tail(inner, [0.6, 0.7]) <= 1e-20


def test_scan_tail_below_support_tolerance():

    inner = construct_inner(blaschke_model(100))

    # S = b b^* with b_0 = -1/2 and b_k = (3/2) 2^-k, whose entries drop below 1e-10 after degree 33
    assert support_degree(inner) == 33

    # ||b_{>33}||^2 = 3 * 4^-34 times the relative kernel tail 0.81^34 beyond degree 33
    assert scan_tail(inner, 0.9) == pytest.approx(3 * 4. ** -34 * 0.81 ** 34, rel=1e-3)
    assert scan_tail(inner, 0.9) > 0


def test_scan_tail_at_truncation_degree():

    inner = construct_inner(blaschke_model(20))

    assert support_degree(inner) == 20
    assert scan_tail(inner, 0.9) == kernel_tail(inner.space, 0.9) > 1e-8


def test_omitted_b_mass():

    assert omitted_b_mass(build_space(KernelSpec.szego(d=1, N=10), 5)) == pytest.approx(0., abs=1e-15)

    spec   = KernelSpec.dirichlet(2, d=1, N=200, mode='float')
    coarse = omitted_b_mass(build_space(spec, 10))
    fine   = omitted_b_mass(build_space(spec, 100))

    assert coarse > fine > 0


def test_vector_valued_inner_multiplier():

    space = build_space(KernelSpec.szego(d=1, N=40), 20, fiber_dim=2)
    model = build_submodule(space, parse_generators('z1 | 0, 0 | 1', space))
    inner = construct_inner(model)

    assert inner.rank == 2
    np.testing.assert_allclose(svdvals(phi_matrix(inner, 0.5)), [1., 0.5], atol=1e-10)


def test_non_nevanlinna_pick_kernel_aborts():

    spec  = KernelSpec.from_coeffs(CoeffSeq.from_values([n + 1 for n in range(21)]), d=1)
    space = build_space(spec, 10)
    model = build_submodule(space, parse_generators('z1', space))

    with pytest.raises(NumericalContractError) as e:
        construct_inner(model)

    assert e.value.value == pytest.approx(-1.)

# --- REPRODUCTION ---

@pytest.mark.parametrize('name', list(REGRESSION_MODELS))
def test_projection_reproduction(name):

    inner  = construct_inner(REGRESSION_MODELS[name](60))
    points = default_sample_points(inner.space.d, n=6, seed=3, rmax=0.6)

    for lam in points:
        for mu in points:
            assert projection_reproduction_check(inner, lam, mu).residual <= 1e-6

# --- RANK ---

def test_rank_profile():

    inner   = construct_inner(coordinate_model(6))
    profile = rank_profile(inner, [[0.3, 0.1], [0., 0.], [0.2j, -0.5]])

    assert profile.m == 1
    assert profile.ranks == [1, 0, 1]
    assert profile.submaximal == [1]

    with pytest.raises(ValueError):
        rank_profile(inner, np.zeros((0, 2)))
