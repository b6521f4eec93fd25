from fractions import Fraction

import numpy as np
import pytest

from innerlab.kernelspace import (
    KernelSpec, PolyFn, build_space, contractive_multiplier_check, coordinate_shift_excess,
    extremal_one_point, fejer_means, graded_lex_basis, hardy_sphere_norm, kernel_eval, kernel_product_chain,
    kernel_tail, kvec, multiplication_matrix, multiplier_norm_lower, np_pick_matrix, np_psd_check,
    point_eval, poly_inner, poly_multiply, random_poly, sphere_monte_carlo_norm,
)
from innerlab.series import CoeffSeq
from innerlab.utils.errors import ConfigError, DegreeOverflowError, KernelDomainError

# --- MONOMIAL BASIS ---

def test_graded_lex_basis_order():

    assert graded_lex_basis(2, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert len(graded_lex_basis(3, 4)) == 35


def test_szego_monomial_norms():

    space = build_space(KernelSpec.szego(d=2, N=4), 4)

    # ||z^k||^2 = k! / |k|! in the Drury-Arveson space
    assert PolyFn.monomial(space, (1, 1)).norm() ** 2 == pytest.approx(0.5)
    assert PolyFn.monomial(space, (2, 0)).norm() ** 2 == pytest.approx(1.)

# --- KERNEL FUNCTIONS ---

def test_kvec_reproduces_point_values(rng):

    space = build_space(KernelSpec.dirichlet(Fraction(1, 2), d=2, N=10), 10)
    p     = random_poly(space, rng)
    lam   = np.array([0.3 + 0.1j, -0.2j])

    assert poly_inner(p, kvec(space, lam)) == pytest.approx(point_eval(p, lam)[0])


@pytest.mark.parametrize('spec', [
    KernelSpec.szego(d=1, N=400),
    KernelSpec.dirichlet(1, d=1, N=400),
    KernelSpec.dirichlet(2, d=1, N=400),
])
def test_kernel_closed_form_matches_partial_sum(spec):

    kv = kernel_eval(spec, 0.7, 0.5j)

    assert kv.closed_form
    assert abs(kv.value - kv.partial) <= kv.tail_bound + 1e-14


def test_boundary_evaluation():

    assert kernel_eval(KernelSpec.dirichlet(2, d=1, N=100), 1, 1).value.real == pytest.approx(np.pi ** 2 / 6)

    with pytest.raises(KernelDomainError):
        kernel_eval(KernelSpec.szego(d=1, N=100), 1, 1)

    with pytest.raises(KernelDomainError):
        kernel_eval(KernelSpec.szego(d=2, N=10), [0.9, 0.9], [0, 0])


def test_kernel_tail_of_szego():

    space = build_space(KernelSpec.szego(d=1, N=40), 10)

    assert kernel_tail(space, 0.5) == pytest.approx(0.25 ** 11, rel=1e-6)
    assert kernel_tail(space, 0.) == 0.


@pytest.mark.parametrize('spec', [
    KernelSpec.szego(d=2, N=60),
    KernelSpec.dirichlet(1, d=1, N=60, mode='float'),
    KernelSpec.dirichlet(2, d=2, N=60, mode='float'),
])
def test_kernel_norm_splits_into_truncation_and_tail(spec):

    space = build_space(spec, 12)
    lam   = np.array([0.5, 0.3j])[:spec.d]
    value = kernel_eval(spec, lam, lam).value.real

    # k_λ(λ) = ||P_N k_λ||^2 + (k_λ(λ) - ||P_N k_λ||^2)
    assert value == pytest.approx(kvec(space, lam).norm() ** 2 + value * kernel_tail(space, lam), rel=1e-12)

# --- PRODUCTS ---

def test_poly_multiply_degree_overflow():

    space = build_space(KernelSpec.szego(d=1, N=4), 2)
    z2    = PolyFn.monomial(space, (2,))

    assert poly_multiply(z2, z2).degree == 4

    with pytest.raises(DegreeOverflowError):
        poly_multiply(z2, z2, target=build_space(space.spec, 3))


def test_multiplication_matrix_of_shift():

    spec   = KernelSpec.szego(d=1, N=6)
    source = build_space(spec, 3)
    z      = PolyFn.monomial(build_space(spec, 1), (1,))

    M = multiplication_matrix(z, source, build_space(spec, 4))

    assert M.shape == (5, 4)
    np.testing.assert_allclose(M.conj().T @ M, np.eye(4), atol=1e-12)

    with pytest.raises(DegreeOverflowError):
        multiplication_matrix(z, source, build_space(spec, 3))


@pytest.mark.parametrize('d', [1, 2, 3])
@pytest.mark.parametrize('alpha', [0, Fraction(1, 2), 1])
def test_coordinate_shift_excess_identity(d, alpha, rng):

    spec  = KernelSpec.dirichlet(alpha, d=d, N=8)
    space = build_space(spec, 6)

    for _ in range(12):

        n = int(rng.integers(0, 7))
        p = random_poly(space, rng, degree=n, homogeneous=True)

        observed, predicted = coordinate_shift_excess(p)
        assert observed == pytest.approx(predicted, rel=1e-12, abs=1e-12)


def test_coordinate_shift_excess_needs_homogeneous(rng):

    space = build_space(KernelSpec.szego(d=2, N=6), 4)

    with pytest.raises(ValueError):
        coordinate_shift_excess(random_poly(space, rng, degree=2))

# --- EXTREMAL FUNCTIONS AND MULTIPLIERS ---

def test_extremal_one_point_function():

    spec = KernelSpec.szego(d=1, N=200)
    lam  = 0.5
    phi  = extremal_one_point(spec, lam, N=100)

    assert phi.norm() == pytest.approx(1., abs=1e-12)
    assert abs(point_eval(phi, lam)[0]) == pytest.approx(0., abs=1e-12)
    # Szegő extremal at λ is the Blaschke factor up to the normalization 1/sqrt(1-|λ|^2)
    assert point_eval(phi, 0)[0].real == pytest.approx(lam)


def test_extremal_one_point_is_contractive(rng):

    for spec, lam, N in [(KernelSpec.szego(d=1, N=80), 0.5, 50), (KernelSpec.szego(d=2, N=40), [0.3, 0.2j], 30)]:

        phi   = extremal_one_point(spec, lam, N=N)
        small = build_space(spec, 5)
        tests = [random_poly(small, rng) for _ in range(10)] + [PolyFn.monomial(small, k) for k in small.basis]

        report = contractive_multiplier_check(spec, phi, tests, N=N + 5)

        assert report.contractive
        assert report.max_ratio <= 1 + 1e-9

        # Blaschke factors are isometric multipliers in one variable
        if spec.d == 1:
            assert report.max_ratio == pytest.approx(1., abs=1e-9)


def test_kernel_product_chain_values():

    spec  = KernelSpec.szego(d=1, N=120)
    space = build_space(spec, 1)

    one = kernel_product_chain(spec, PolyFn.constant(space), 0.5, N=100)
    z   = kernel_product_chain(spec, PolyFn.monomial(space, (1,)), 0.5, N=100)

    np.testing.assert_allclose(one, [1, 1, 1], atol=1e-12)
    np.testing.assert_allclose(z, [0.25, 1, 1], atol=1e-12)


def test_kernel_product_chain_dirichlet():

    spec = KernelSpec.dirichlet(1, d=1, N=300, mode='float')
    z    = PolyFn.monomial(build_space(spec, 1), (1,))

    first, second, third = kernel_product_chain(spec, z, 0.5, N=200)

    assert first < second < third + 1e-9


def test_multiplier_norm_lower_of_coordinate():

    spec = KernelSpec.szego(d=1, N=40)
    z    = PolyFn.monomial(build_space(spec, 1), (1,))

    assert multiplier_norm_lower(spec, z, N=20) == pytest.approx(1.)


@pytest.mark.parametrize('N', [1, 10, 200])
def test_dirichlet_shift_multiplier_norm(N):

    spec = KernelSpec.dirichlet(1, d=1, N=210, mode='float')
    z    = PolyFn.monomial(build_space(spec, 1), (1,))

    # sup_n ((n+2)/(n+1))^(1/2) is attained at n = 0
    assert multiplier_norm_lower(spec, z, N=N) == pytest.approx(np.sqrt(2), rel=1e-12)


@pytest.mark.parametrize('spec', [KernelSpec.szego(d=2, N=20), KernelSpec.dirichlet(1, d=1, N=20)])
def test_fejer_means_multiplier_norm(spec, rng):

    phi = random_poly(build_space(spec, 3), rng)

    for n in range(4):
        assert multiplier_norm_lower(spec, fejer_means(phi, n), N=6) <= multiplier_norm_lower(spec, phi, N=6 + n) + 1e-10


def test_contractive_multiplier_check():

    szego     = KernelSpec.szego(d=1, N=10)
    dirichlet = KernelSpec.dirichlet(1, d=1, N=10)

    def check(spec):
        z     = PolyFn.monomial(build_space(spec, 1), (1,))
        tests = [PolyFn.monomial(build_space(spec, 3), (k,)) for k in range(4)]
        return contractive_multiplier_check(spec, z, tests, N=4)

    shift = check(szego)
    assert shift.contractive
    assert shift.n_tested == 4
    assert shift.max_ratio == pytest.approx(1.)

    # ||z^(n+1)||^2 / ||z^n||^2 = (n+2) / (n+1) in the Dirichlet space
    dirichlet_shift = check(dirichlet)
    assert not dirichlet_shift.contractive
    assert dirichlet_shift.max_ratio == pytest.approx(np.sqrt(2))


def test_fejer_means_weights():

    space = build_space(KernelSpec.szego(d=1, N=3), 3)
    p     = PolyFn.from_terms(space, {(0,): 1, (1,): 1, (2,): 1, (3,): 1})

    np.testing.assert_allclose(fejer_means(p, 2).coeffs[:, 0], [1, 2 / 3, 1 / 3, 0])

    with pytest.raises(ValueError):
        fejer_means(p, -1)


def test_sphere_norm_monte_carlo():

    space = build_space(KernelSpec.szego(d=2, N=2), 2)
    p     = PolyFn.from_terms(space, {(1, 1): 1, (0, 0): 1})

    estimate, stderr = sphere_monte_carlo_norm(p, samples=20000, seed=0)

    # ||z1 z2||^2 = 1/6 on the sphere of C^2
    assert hardy_sphere_norm(p) == pytest.approx(1 + 1 / 6)
    assert abs(estimate - hardy_sphere_norm(p)) <= 5 * stderr

@pytest.mark.parametrize('d', [1, 2, 3])
def test_sphere_norm_below_space_norm(d, rng):

    space = build_space(KernelSpec.szego(d=d, N=5), 5)

    for _ in range(20):
        p = random_poly(space, rng)
        assert hardy_sphere_norm(p) <= p.norm() ** 2 * (1 + 1e-12)

    # Equality in one variable
    if d == 1:
        assert hardy_sphere_norm(p) == pytest.approx(p.norm() ** 2)

# --- PICK MATRICES ---

def test_np_psd_check():

    points = [[0.1, 0.2], [0.5j, -0.3], [0.4, 0.4], [-0.6, 0.1j]]

    assert np_psd_check(KernelSpec.szego(d=2, N=10), points)
    assert np_psd_check(KernelSpec.dirichlet(1, d=2, N=10), points)
    assert not np_psd_check(KernelSpec.from_coeffs(CoeffSeq.from_values([n + 1 for n in range(200)]), d=1), [0.9, 0.5, -0.7])


def test_np_pick_matrix_of_szego():

    G, min_eig = np_pick_matrix(KernelSpec.szego(d=1, N=10), [0, 0.5])

    # 1 - 1/k_μ(λ) = λ conj(μ)
    np.testing.assert_allclose(G, [[0, 0], [0, 0.25]], atol=1e-12)
    assert min_eig == pytest.approx(0., abs=1e-12)

    with pytest.raises(ValueError):
        np_pick_matrix(KernelSpec.szego(d=1, N=10), [])

# --- KERNEL DESCRIPTIONS ---

def test_kernel_from_text(tmp_path):

    assert KernelSpec.from_text('szego', d=2, N=10).closed_form is not None
    assert KernelSpec.from_text('dirichlet:1/2', d=1, N=10).alpha == Fraction(1, 2)

    fp = tmp_path / 'a.csv'
    fp.write_text(CoeffSeq.dirichlet(1, N=12).to_csv_text())

    spec = KernelSpec.from_text(str(fp), d=1, N=10)
    assert spec.degree == 10
    assert spec.closed_form is None


@pytest.mark.parametrize('text', ['dirichlet:x', 'dirichlet:-1', 'hardy'])
def test_kernel_from_text_errors(text):

    with pytest.raises(ConfigError) as e:
        KernelSpec.from_text(text, d=1, N=10)

    assert e.value.field == 'spec'
