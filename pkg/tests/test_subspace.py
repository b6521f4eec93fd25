import numpy as np
import pytest

from conftest import REGRESSION_MODELS, blaschke_model, coordinate_model
from innerlab.kernelspace import KernelSpec, PolyFn, build_space, kernel_tail, parse_poly, sample_sphere
from innerlab.subspace import (
    annihilates_quotient, build_submodule, counterexample_closed_form, evaluation_dimension,
    extremal_solution, point_zero_generators, point_zero_submodule, radial_scan, ratio, ratio_report,
)
from innerlab.utils.errors import DegreeOverflowError, KernelDomainError, TruncationBudgetError

BLASCHKE_AT_09 = (0.4 / 0.55) ** 2

# --- MODELS ---

def test_blaschke_model_dimension():

    model = blaschke_model(100)

    assert model.dim == 100
    assert model.kind == 'generators'
    np.testing.assert_allclose(model.projection @ model.projection, model.projection, atol=1e-10)


def test_point_zero_matches_generated_subspace():

    space  = build_space(KernelSpec.szego(d=2, N=12), 6)
    z0     = [0.3, -0.2j]
    by_gen = build_submodule(space, point_zero_generators(space, z0))
    by_pt  = point_zero_submodule(space, z0)

    assert by_gen.dim == by_pt.dim == space.dim - 1
    np.testing.assert_allclose(by_gen.projection, by_pt.projection, atol=1e-9)


def test_zero_generators_rejected():

    space = build_space(KernelSpec.szego(d=1, N=4), 2)

    with pytest.raises(ValueError):
        build_submodule(space, [PolyFn.zeros(space)])


def test_boundary_point_zero_needs_convergent_kernel():

    with pytest.raises(KernelDomainError):
        point_zero_submodule(build_space(KernelSpec.szego(d=1, N=20), 10), 1)

# --- RATIO ---

def test_blaschke_ratio():

    assert ratio(blaschke_model(100), 0.9) == pytest.approx(BLASCHKE_AT_09, abs=1e-6)


def test_coordinate_ratio_is_squared_norm():

    model = coordinate_model(30)
    lam   = np.array([0.3 + 0.2j, -0.4])

    assert ratio(model, lam) == pytest.approx(np.vdot(lam, lam).real, abs=1e-10)


def test_ratio_report_tail():

    model  = blaschke_model(100)
    report = ratio_report(model, 0.9)

    assert report.ratio == ratio(model, 0.9)
    assert report.tail_bound == kernel_tail(model.space, 0.9)
    assert report.tail_bound == pytest.approx(0.81 ** 101, rel=1e-6)


def test_ratio_outside_open_ball():

    with pytest.raises(KernelDomainError):
        ratio(blaschke_model(20), 1.)


@pytest.mark.parametrize('name', list(REGRESSION_MODELS))
def test_ratio_monotone_in_truncation(name):

    build  = REGRESSION_MODELS[name]
    d      = build(2).space.d
    points = 0.8 * sample_sphere(d, 10, np.random.default_rng(1))

    previous = np.zeros(len(points))

    for N in [2, 4, 8, 16]:

        model   = build(N)
        current = np.array([ratio(model, p) for p in points])

        assert np.all(current >= previous - 1e-9)
        assert np.all(current <= 1 + 1e-9)

        previous = current


def test_radial_scan_budget():

    model = blaschke_model(100)
    df    = radial_scan(model, 1, [0.5, 0.9])

    assert list(df.columns) == ['t', 'ratio', 'tail_bound']
    assert df['ratio'].iloc[-1] == pytest.approx(BLASCHKE_AT_09, abs=1e-6)

    with pytest.raises(TruncationBudgetError):
        radial_scan(blaschke_model(20), 1, [0.9])


def test_radial_scan_needs_unit_direction():

    with pytest.raises(ValueError):
        radial_scan(blaschke_model(20), 0.5, [0.1])

# --- BOUNDED KERNEL COUNTEREXAMPLE ---

def test_counterexample_radial_scan():

    space = build_space(KernelSpec.dirichlet(2, d=1, N=1000, mode='float'), 500)
    model = point_zero_submodule(space, 1)

    df     = radial_scan(model, -1, [0.95])
    closed = counterexample_closed_form(2, 1, -0.95)

    assert df['ratio'].iloc[0] == pytest.approx(closed.value, abs=0.02)


def test_counterexample_boundary_values():

    at_minus_one = counterexample_closed_form(2, 1, -1)

    assert at_minus_one.value == pytest.approx(0.75, abs=1e-9)
    assert at_minus_one.lower <= at_minus_one.value <= at_minus_one.upper

    for theta in np.linspace(0, 2 * np.pi, 73):
        w = np.exp(1j * theta)
        if abs(w - 1) > 0.5:
            assert counterexample_closed_form(2, 1, w, N=1000).value < 1 - 0.1


def test_counterexample_needs_bounded_kernel():

    with pytest.raises(ValueError):
        counterexample_closed_form(1, 1, -1)

# --- EXTREMAL SOLUTION AND EVALUATION ---

def test_extremal_solution_of_point_zero():

    spec  = KernelSpec.szego(d=1, N=80)
    space = build_space(spec, 40)
    phi   = extremal_solution(point_zero_submodule(space, 0.5))

    # Blaschke factor (0.5 - z)/(1 - z/2) up to a unimodular constant
    assert phi.norm() == pytest.approx(1., abs=1e-9)
    assert phi(0)[0].real == pytest.approx(0.5, abs=1e-9)
    assert abs(phi(0.5)[0]) == pytest.approx(0., abs=1e-9)


def test_extremal_solution_degenerate():

    with pytest.raises(ValueError):
        extremal_solution(coordinate_model(4))


def test_evaluation_dimension():

    model = coordinate_model(6)

    assert evaluation_dimension(model, [0.3, 0.1]) == 1
    assert evaluation_dimension(model, [0., 0.]) == 0


def test_annihilates_quotient():

    model = coordinate_model(6)
    space = model.space

    assert annihilates_quotient(model, parse_poly('z1', space))
    assert not annihilates_quotient(model, parse_poly('1 + z1', space))

    with pytest.raises(DegreeOverflowError):
        annihilates_quotient(model, parse_poly('z1^7', build_space(space.spec, 7)))
