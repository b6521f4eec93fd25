'''
This module contains the type definitions used across the innerlab package.
'''

from fractions import Fraction
from typing import Any, Dict, List, Tuple

import numpy as np
from numpy.typing import NDArray

# --- SCALARS ---

Scalar = Fraction | float | Any
'''
Entry of a coefficient sequence. Depending on the sequence mode it is
an exact `Fraction`, a python `float` or an `mpmath.iv` interval
(the latter has no public type to annotate with, hence `Any`).
'''

# --- POINTS ---

Point = NDArray[np.complex128]
'''
Point of the closed unit ball of C^d, represented as a one-dimensional
complex array of length d. Scalar complex inputs are promoted to length-1 arrays.
'''

Points = NDArray[np.complex128]
'''
Batch of points of C^d as a two-dimensional array [n_points x d].
'''

FiberVector = NDArray[np.complex128]
'''
Vector of the coefficient space D, a complex array of length fiber_dim.
'''

# --- MONOMIALS ---

MultiIndex = Tuple[int, ...]
'''
Exponent vector k = (k_1, ..., k_d) of the monomial z^k.
Its total degree is |k| = sum(k). Monomials are always enumerated
in graded lexicographic order, first by total degree and then
lexicographically descending on the exponents, e.g. for d=2
(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...
'''

Terms = Dict[MultiIndex, Fraction]
'''
Exact sparse representation of a scalar polynomial as a mapping
from multi-index to rational coefficient, as produced by the parser.
'''

# --- LINEAR ALGEBRA ---

Coefficients = NDArray[np.complex128]
'''
Dense coefficients of a polynomial in a truncated space, a two-dimensional array
[n_monomials x fiber_dim] whose rows follow the graded lexicographic basis.
'''

Matrix = NDArray[np.complex128]
'''
Operator on a truncated space expressed in orthonormal monomial coordinates,
i.e. on the flattened vector whose entry (b, j) is sqrt(w_b) times the coefficient
of the b-th monomial along the j-th fiber direction. The flat index is b * fiber_dim + j.
'''

Grid = List[float]
''' Radii t in (0, 1) used by radial scans and curvature families. '''
