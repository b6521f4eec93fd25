from fractions import Fraction

import numpy as np
import pytest

from innerlab.kernelspace import KernelSpec, build_space, parse_generators, parse_poly
from innerlab.utils.errors import ConfigError, DegreeOverflowError, PolyParseError
from innerlab.utils.parsing import parse_grid, parse_point, parse_terms

# --- POLYNOMIAL GRAMMAR ---

def test_exact_rational_coefficient():

    terms = parse_terms('z1 - 1/2*z2', d=2)

    assert terms == {(1, 0): Fraction(1), (0, 1): Fraction(-1, 2)}
    assert isinstance(terms[(0, 1)], Fraction)


def test_powers_and_products():

    assert parse_terms('z1^2*z2', d=2) == {(2, 1): Fraction(1)}
    assert parse_terms('z1*z1 + 3', d=1) == {(2,): Fraction(1), (0,): Fraction(3)}


def test_decimal_literals_are_exact():

    assert parse_terms('0.1*z1', d=1) == {(1,): Fraction(1, 10)}


def test_whitespace_and_cancellation():

    assert parse_terms('  z1 +z2-   z1 ', d=2) == {(0, 1): Fraction(1)}


def test_unknown_variable():

    with pytest.raises(PolyParseError) as e:
        parse_terms('z1 + z3', d=2)

    assert 'z3' in str(e.value)
    assert e.value.position == 5
    assert e.value.field == 'generators'


@pytest.mark.parametrize('text', ['', 'z1 +', '2**z1', 'x1'])
def test_syntax_errors(text):

    with pytest.raises(PolyParseError):
        parse_terms(text, d=2)


def test_syntax_error_position():

    with pytest.raises(PolyParseError) as e:
        parse_terms('z1+*z2', d=2)

    assert e.value.position == 3
    assert e.value.field == 'generators'

# --- POLYNOMIALS OF A SPACE ---

def test_parse_poly():

    space = build_space(KernelSpec.szego(d=2, N=4), 3)
    p     = parse_poly('z1 - 1/2*z2', space)

    assert p.degree == 1
    assert p((0.2, 0.4))[0] == pytest.approx(0.)

    with pytest.raises(DegreeOverflowError):
        parse_poly('z1^4', space)


def test_parse_generators_fiber_vectors():

    space = build_space(KernelSpec.szego(d=2, N=4), 3, fiber_dim=2)
    gens  = parse_generators('z1, z2 | 0', space)

    # Scalar items are repeated along every fiber direction
    assert len(gens) == 3
    np.testing.assert_allclose(gens[2].coeffs[space.index[(0, 1)]], [1, 0])
    np.testing.assert_allclose(gens[1].coeffs[space.index[(1, 0)]], [0, 1])

    with pytest.raises(ConfigError) as e:
        parse_generators('z1 | z2 | 1', space)
    assert e.value.field == 'generators'

# --- POINTS AND GRIDS ---

def test_parse_point():

    np.testing.assert_allclose(parse_point('0.6, 0.8'), [0.6, 0.8])
    np.testing.assert_allclose(parse_point('0.5+0.1j'), [0.5 + 0.1j])

    with pytest.raises(ConfigError) as e:
        parse_point('a,b', field='point_zero')
    assert e.value.field == 'point_zero'


def test_parse_grid():

    assert parse_grid('0.5,0.7,0.9') == [0.5, 0.7, 0.9]
    assert parse_grid('0:1:5') == pytest.approx([0, 0.25, 0.5, 0.75, 1])

    with pytest.raises(ConfigError):
        parse_grid('0:1')
