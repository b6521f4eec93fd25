'''
Parsers for the textual inputs of the command line and of the job files:
- polynomials in the variables z1..zd with exact rational coefficients,
  e.g. `z1 - 1/2*z2` or `3*z1^2*z2 + 0.25`;
- points of C^d as comma separated complex literals, e.g. `0.6,0.8`;
- radius grids either as comma separated values or as `start:stop:num`.

The polynomial grammar is an LR grammar handled by `parglare`. The parser
is built once; semantic checks (unknown variables, zero-length input) are
performed on the parse result so that errors carry the character offset.
'''

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import List, Tuple

import numpy as np
from parglare import Grammar, Parser

try:
    from parglare import ParseError
except ImportError:
    # Renamed in later parglare releases
    from parglare import SyntaxError as ParseError

from innerlab.utils.errors import ConfigError, PolyParseError
from innerlab.utils.types import Grid, MultiIndex, Point, Terms

# --- GRAMMAR ---

POLY_GRAMMAR = r'''
Poly: Poly '+' Term
    | Poly '-' Term
    | '-' Term
    | Term;

Term: Term '*' Factor
    | Factor;

Factor: Power
      | Number;

Power: variable '^' integer
     | variable;

Number: rational
      | decimal;

terminals
variable: /z\d+/;
integer: /\d+/;
rational: /\d+\s*\/\s*\d+/;
decimal: /\d+\.\d*|\.\d+|\d+/;
'''

# NOTE: Actions build raw terms as a pair (coefficient, factors) where factors
#       is a list of (variable index, power, position). Variables are checked
#       against the dimension only after parsing.

RawFactor = Tuple[int, int, int]
RawTerm   = Tuple[Fraction, List[RawFactor]]

def _rational(value: str) -> Fraction:

    num, den = (part.strip() for part in value.split('/'))
    return Fraction(int(num), int(den))

def _negate(term: RawTerm) -> RawTerm: return -term[0], term[1]

def _times(term: RawTerm, factor: RawTerm) -> RawTerm: return term[0] * factor[0], term[1] + factor[1]

POLY_ACTIONS = {
    'Poly': [
        lambda _, n: n[0] + [n[2]],
        lambda _, n: n[0] + [_negate(n[2])],
        lambda _, n: [_negate(n[1])],
        lambda _, n: [n[0]],
    ],
    'Term': [
        lambda _, n: _times(n[0], n[2]),
        lambda _, n: n[0],
    ],
    'Factor': [
        lambda _, n: n[0],
        lambda _, n: n[0],
    ],
    'Power': [
        lambda _, n: (Fraction(1), [(n[0][0], int(n[2]), n[0][1])]),
        lambda _, n: (Fraction(1), [(n[0][0], 1,         n[0][1])]),
    ],
    'Number': [
        lambda _, n: (n[0], []),
        lambda _, n: (n[0], []),
    ],
    'variable': lambda ctx, value: (int(value[1:]), ctx.start_position),
    'rational': lambda _,   value: _rational(value),
    'decimal' : lambda _,   value: Fraction(value),
}

@lru_cache(maxsize=1)
def _poly_parser() -> Parser:
    ''' Build the LR parser of the polynomial grammar once. '''

    grammar = Grammar.from_string(POLY_GRAMMAR)
    return Parser(grammar, actions=POLY_ACTIONS)

# --- POLYNOMIALS ---

def parse_terms(text: str, d: int) -> Terms:
    '''
    Parse a polynomial in the variables z1..zd into its exact terms.

    Decimal literals are converted exactly from their text (`0.1` is 1/10).
    Repeated monomials are summed and vanishing terms dropped.

    :param text: Polynomial text, whitespace insensitive.
    :type text: str
    :param d: Number of variables.
    :type d: int
    :raises PolyParseError: On syntax errors or variables out of z1..zd,
        with the 0-based offset of the offending character.
    :return: Mapping from multi-index to rational coefficient.
    :rtype: Terms
    '''

    if not text.strip():
        raise PolyParseError(text=text, position=0, msg='Empty polynomial')

    try:
        raw_terms: List[RawTerm] = _poly_parser().parse(text)
    except ParseError as e:
        position = getattr(getattr(e, 'location', None), 'start_position', 0) or 0
        raise PolyParseError(text=text, position=position, msg='Unexpected input') from e

    terms: Terms = {}

    for coef, factors in raw_terms:

        exponents = [0] * d

        for var, power, position in factors:
            if not 1 <= var <= d:
                raise PolyParseError(
                    text=text, position=position,
                    msg=f'Unknown variable z{var}, valid variables are z1..z{d}'
                )
            exponents[var - 1] += power

        key: MultiIndex = tuple(exponents)
        terms[key] = terms.get(key, Fraction(0)) + coef

    return {k: c for k, c in terms.items() if c != 0}


def split_poly_list(text: str) -> List[str]:
    ''' Split a comma separated list of generators, dropping empty items. '''

    return [item.strip() for item in text.split(',') if item.strip()]

# --- POINTS AND GRIDS ---

def parse_point(text: str, field: str = 'point') -> Point:
    '''
    Parse a point of C^d from comma separated python complex literals,
    e.g. `0.6,0.8` or `0.5+0.1j`.

    :param text: Point text.
    :type text: str
    :param field: Configuration field reported on errors.
    :type field: str
    :return: The point as a complex array of length d.
    :rtype: Point
    '''

    try:
        coords = [complex(c.strip().replace(' ', '')) for c in text.split(',') if c.strip()]
    except ValueError as e:
        raise ConfigError(field=field, msg=f'Invalid point `{text}`: {e}') from e

    if not coords:
        raise ConfigError(field=field, msg='Empty point')

    return np.array(coords, dtype=np.complex128)


def parse_grid(text: str, field: str = 'tgrid') -> Grid:
    '''
    Parse a radius grid, either a comma separated list `0.5,0.7,0.9`
    or a linear range `start:stop:num` with both endpoints included.
    '''

    try:
        if ':' in text:
            start, stop, num = text.split(':')
            grid = np.linspace(float(start), float(stop), int(num)).tolist()
        else:
            grid = [float(t) for t in text.split(',') if t.strip()]
    except ValueError as e:
        raise ConfigError(field=field, msg=f'Invalid grid `{text}`: {e}') from e

    if not grid:
        raise ConfigError(field=field, msg='Empty grid')

    return grid
