'''
This module implements the truncated model of the reproducing kernel Hilbert space H(k, D)
of a U-invariant kernel on the unit ball B_d

    k_λ(z) = Σ_n a_n <z, λ>^n

Monomials z^k are mutually orthogonal with squared norms w_k = k! / (a_|k| |k|!), so the
polynomials of total degree at most N form an exactly represented subspace. Every operator
acting on it is expressed in the orthonormal coordinates sqrt(w_k) z^k (see `Matrix` type).

The file implements:
1. KernelSpec:     the kernel, given by the ball dimension and its coefficient sequence.
2. TruncatedSpace: the graded lexicographic monomial basis up to degree N with its weights.
3. PolyFn:         a fiber valued polynomial living in a truncated space, and its text form.
4. Kernel evaluation, kernel vectors, products and multiplication matrices.
5. Checks on extremal functions, multiplier norms, Fejér means, sphere norms and Pick matrices.
'''

from __future__ import annotations

import os
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Any, Dict, Iterator, List, Mapping, Sequence, Tuple

import mpmath
import numpy as np
from numpy.typing import NDArray
from scipy.linalg import eigvalsh, svdvals
from scipy.special import comb

from innerlab.series import CoeffSeq, SeqMode, reciprocal_coeffs
from innerlab.utils.errors import ConfigError, DegreeOverflowError, KernelDomainError, NumericalContractError
from innerlab.utils.misc import as_point, hermitian_part
from innerlab.utils.parsing import parse_terms, split_poly_list
from innerlab.utils.types import Coefficients, FiberVector, Matrix, MultiIndex, Point, Points

BOUNDARY_TOL = 1e-12
''' Slack on |<z, λ>| <= 1 and on the unit norm of boundary points. '''

CONTRACTIVE_TOL = 1e-9

# --- KERNEL ---

class ClosedForm(str, Enum):
    ''' Kernels with a known closed form evaluator. '''

    Szego     = 'szego'
    Dirichlet = 'dirichlet'

    def __str__(self) -> str: return self.value


@dataclass(frozen=True, eq=False)
class KernelSpec:
    '''
    U-invariant kernel on B_d described by its coefficient sequence {a_n}.
    The optional closed form tag enables exact kernel evaluation:
    `szego` for a_n = 1 and `dirichlet` for a_n = (n+1)^(-alpha).
    '''

    d           : int
    a           : CoeffSeq
    name        : str = ''
    closed_form : ClosedForm | None = None
    alpha       : Fraction | None = None

    def __post_init__(self):

        if self.d < 1:
            raise ValueError(f'Ball dimension must be positive, got d = {self.d}')

        if self.a_float[0] != 1:
            raise ValueError(f'Kernel not normalized, a[0] = {self.a[0]}')

        if self.a.degree >= 1 and not self.a_float[1] > 0:
            raise ValueError(f'Kernel needs a[1] > 0 for the coordinate multipliers, got {self.a[1]}')

        if self.closed_form == ClosedForm.Dirichlet and self.alpha is None:
            raise ValueError('Dirichlet closed form needs the exponent alpha')

    # --- FACTORIES ---

    @classmethod
    def szego(cls, d: int, N: int) -> KernelSpec:
        ''' Szegő (Drury-Arveson) kernel 1/(1 - <z, λ>) on B_d with coefficients through degree N. '''

        return cls(d=d, a=CoeffSeq.szego(N), name='szego', closed_form=ClosedForm.Szego)

    @classmethod
    def dirichlet(
        cls,
        alpha : Fraction | int | float,
        d     : int,
        N     : int,
        mode  : SeqMode | str | None = None
    ) -> KernelSpec:
        ''' Weighted Dirichlet kernel with coefficients a_n = (n+1)^(-alpha) through degree N. '''

        alpha = Fraction(alpha)
        return cls(
            d=d, a=CoeffSeq.dirichlet(alpha, N, mode=mode),
            name=f'dirichlet:{alpha}', closed_form=ClosedForm.Dirichlet, alpha=alpha
        )

    @classmethod
    def from_coeffs(cls, a: CoeffSeq, d: int, name: str = 'custom') -> KernelSpec:
        ''' Kernel without closed form, evaluated by partial sums. '''

        return cls(d=d, a=a, name=name)

    @classmethod
    def from_text(cls, text: str, d: int, N: int, exact: bool = False) -> KernelSpec:
        '''
        Kernel from its job-file description: `szego`, `dirichlet:<alpha>` with a rational
        alpha (e.g. `dirichlet:1/2`) or the path of a coefficient CSV file.

        :param text: Kernel description.
        :type text: str
        :param d: Dimension of the ball.
        :type d: int
        :param N: Degree of the coefficient sequence. Files must provide at least N coefficients.
        :type N: int
        :param exact: If to keep Dirichlet coefficients exact (integer alpha) or rigorous
            intervals (rational alpha), floats otherwise.
        :type exact: bool, optional
        :raises ConfigError: On unknown descriptions or invalid exponents.
        '''

        name, _, arg = text.strip().partition(':')

        match name.lower():

            case 'szego':
                return cls.szego(d=d, N=N)

            case 'dirichlet':
                try:
                    alpha = Fraction(arg.strip())
                except (ValueError, ZeroDivisionError) as e:
                    raise ConfigError(field='spec', msg=f'Invalid Dirichlet exponent `{arg}`') from e
                if alpha < 0:
                    raise ConfigError(field='spec', msg=f'Dirichlet exponent must be nonnegative, got {alpha}')
                return cls.dirichlet(alpha=alpha, d=d, N=N, mode=None if exact else SeqMode.Float)

        if not os.path.exists(text):
            raise ConfigError(field='spec', msg=f'Unknown kernel `{text}`, expected `szego`, `dirichlet:<alpha>` or a CSV file')

        a = CoeffSeq.from_csv(text)
        if a.degree < N:
            raise ConfigError(field='spec', msg=f'{text} has coefficients through degree {a.degree}, needed {N}')

        try:
            return cls.from_coeffs(a=a.truncate(N), d=d, name=os.path.basename(text))
        except ValueError as e:
            raise ConfigError(field='spec', msg=str(e)) from e

    # --- MAGIC METHODS ---

    def __str__ (self) -> str: return f'KernelSpec[{self.name}; d: {self.d}; degree: {self.degree}]'
    def __repr__(self) -> str: return str(self)

    # --- PROPERTIES ---

    @property
    def degree(self) -> int: return self.a.degree

    @cached_property
    def a_float(self) -> NDArray[np.float64]:
        ''' Kernel coefficients as floats. '''

        return self.a.as_array()

    @cached_property
    def b(self) -> CoeffSeq:
        ''' Representation coefficients in the mode of the kernel coefficients. '''

        return reciprocal_coeffs(self.a)

    @cached_property
    def b_float(self) -> NDArray[np.float64]:
        '''
        Representation coefficients by the floating reciprocal recursion.

        NOTE: It avoids the exact recursion, whose cost grows quickly with
              the size of the rationals, when only floats are needed.
        '''

        a = self.a_float
        b = np.zeros_like(a)
        for n in range(1, len(a)):
            b[n] = a[n] - np.dot(b[1:n], a[n - 1:0:-1])
        return b

    @property
    def is_boundary_convergent(self) -> bool:
        ''' Whether Σ a_n converges, i.e. the kernel extends to the closed ball. '''

        return self.closed_form == ClosedForm.Dirichlet and self.alpha > 1

    def same_kernel(self, other: KernelSpec) -> bool:
        ''' Whether the two specifications describe the same kernel on their common degrees. '''

        if self is other:
            return True

        n = min(self.degree, other.degree) + 1
        return self.d == other.d and np.array_equal(self.a_float[:n], other.a_float[:n])

# --- MONOMIAL BASIS ---

def _compositions(n: int, d: int) -> Iterator[MultiIndex]:
    ''' Exponent vectors of total degree n in descending lexicographic order. '''

    if d == 1:
        yield (n,)
        return

    for first in range(n, -1, -1):
        for rest in _compositions(n - first, d - 1):
            yield (first,) + rest


def graded_lex_basis(d: int, N: int) -> List[MultiIndex]:
    '''
    Monomial basis of the polynomials of degree at most N in d variables,
    ordered by total degree and then lexicographically descending, e.g. for d = 2:
    (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...

    NOTE: The basis of degree N is a prefix of the basis of any degree N' >= N.
    '''

    return [k for n in range(N + 1) for k in _compositions(n, d)]


def multinomial(k: MultiIndex) -> int:
    ''' Multinomial coefficient |k|! / k! '''

    out, partial = 1, 0
    for e in k:
        partial += e
        out *= int(comb(partial, e, exact=True))
    return out


def monomial_label(k: MultiIndex) -> str:
    ''' Text label of a monomial in the polynomial grammar, `1` for the constant. '''

    factors = [f'z{i+1}' if e == 1 else f'z{i+1}^{e}' for i, e in enumerate(k) if e]
    return '*'.join(factors) if factors else '1'


@dataclass(frozen=True, eq=False)
class TruncatedSpace:
    '''
    The polynomials of degree at most N in H(k, D), with D = C^fiber_dim.
    Coordinates are indexed by the pair (monomial, fiber direction) flattened as b * fiber_dim + j.
    '''

    spec      : KernelSpec
    N         : int
    fiber_dim : int = 1

    basis     : Tuple[MultiIndex, ...]       = field(init=False, repr=False)
    index     : Dict[MultiIndex, int]        = field(init=False, repr=False)
    exponents : NDArray[np.int64]            = field(init=False, repr=False)
    degrees   : NDArray[np.int64]            = field(init=False, repr=False)
    weights   : NDArray[np.float64]          = field(init=False, repr=False)
    _shifts   : Dict[MultiIndex, Any]        = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):

        basis     = tuple(graded_lex_basis(self.spec.d, self.N))
        exponents = np.array(basis, dtype=np.int64).reshape(len(basis), self.spec.d)
        degrees   = exponents.sum(axis=1)

        # Squared norms w_k = k! / (a_|k| |k|!)
        a       = self.spec.a_float
        weights = np.array([1. / (multinomial(k) * a[sum(k)]) for k in basis])

        for name, value in [
            ('basis',     basis),
            ('index',     {k: i for i, k in enumerate(basis)}),
            ('exponents', exponents),
            ('degrees',   degrees),
            ('weights',   weights),
        ]:
            object.__setattr__(self, name, value)

    # --- MAGIC METHODS ---

    def __str__ (self) -> str: return f'TruncatedSpace[{self.spec.name}; d: {self.d}; N: {self.N}; D: {self.fiber_dim}]'
    def __repr__(self) -> str: return str(self)
    def __len__ (self) -> int: return len(self.basis)

    # --- PROPERTIES ---

    @property
    def d(self) -> int: return self.spec.d

    @property
    def dim(self) -> int:
        ''' Dimension of the truncated space, C(N+d, d) * fiber_dim. '''

        return len(self.basis) * self.fiber_dim

    @cached_property
    def sqrt_weights(self) -> NDArray[np.float64]: return np.sqrt(self.weights)

    @cached_property
    def flat_degrees(self) -> NDArray[np.int64]:
        ''' Total degree of every flat coordinate. '''

        return np.repeat(self.degrees, self.fiber_dim)

    def labels(self) -> List[str]:
        ''' Labels of the flat coordinates, monomial and fiber direction for D > 1. '''

        if self.fiber_dim == 1:
            return [monomial_label(k) for k in self.basis]
        return [f'{monomial_label(k)}#{j}' for k in self.basis for j in range(self.fiber_dim)]

    def compatible(self, other: TruncatedSpace) -> bool:
        ''' Whether two spaces share kernel and fiber, possibly with different degrees. '''

        return self.fiber_dim == other.fiber_dim and self.spec.same_kernel(other.spec)

    # --- EVALUATION ---

    def monomials(self, points: Point | Points) -> NDArray[np.complex128]:
        '''
        Evaluate every basis monomial at one or many points.

        :param points: A point [d] or a batch of points [n_points x d].
        :type points: Point | Points
        :return: Monomial values [n_basis] or [n_points x n_basis].
        :rtype: NDArray[np.complex128]
        '''

        pts    = np.asarray(points, dtype=np.complex128)
        single = pts.ndim == 1
        pts    = np.atleast_2d(pts)

        if pts.shape[1] != self.d:
            raise ValueError(f'Expected points of dimension {self.d}, got {pts.shape[1]}')

        values = np.prod(pts[:, None, :] ** self.exponents[None, :, :], axis=2)

        return values[0] if single else values

    # --- OPERATORS ---

    def shift_indices(self, k: MultiIndex) -> Tuple[NDArray[np.int64], NDArray[np.int64], NDArray[np.float64]]:
        '''
        Sparse description of the compression of M_{z^k} in orthonormal coordinates:
        the basis element of index src[i] is mapped to scale[i] times the one of index dst[i].
        Monomials whose product exceeds degree N are dropped. Results are cached.
        '''

        if k not in self._shifts:

            n   = sum(k)
            src = np.flatnonzero(self.degrees + n <= self.N)
            dst = np.array([self.index[tuple(np.add(self.basis[i], k))] for i in src], dtype=np.int64)

            scale = np.sqrt(self.weights[dst] / self.weights[src]) if len(src) else np.zeros(0)
            self._shifts[k] = (src, dst.reshape(-1), scale)

        return self._shifts[k]

    def shift_matrix(self, i: int) -> Matrix:
        ''' Compression of the coordinate multiplier M_{z_i} (0-based i) to the truncated space. '''

        e = tuple(1 if j == i else 0 for j in range(self.d))
        src, dst, scale = self.shift_indices(e)

        n = len(self.basis)
        T = np.zeros((n, n), dtype=np.complex128)
        T[dst, src] = scale

        return np.kron(T, np.eye(self.fiber_dim))


def build_space(spec: KernelSpec, N: int, fiber_dim: int = 1) -> TruncatedSpace:
    '''
    Build the truncated space of degree N of H(k, C^fiber_dim).

    :param spec: Kernel.
    :type spec: KernelSpec
    :param N: Truncation degree.
    :type N: int
    :param fiber_dim: Dimension of the coefficient space, defaults to 1.
    :type fiber_dim: int, optional
    :raises ValueError: If the kernel has less than N+1 coefficients.
    :return: The truncated space.
    :rtype: TruncatedSpace
    '''

    if N < 0:
        raise ValueError(f'Truncation degree must be nonnegative, got N = {N}')

    if fiber_dim < 1:
        raise ValueError(f'Fiber dimension must be positive, got {fiber_dim}')

    if spec.degree < N:
        raise ValueError(f'Kernel {spec.name} has coefficients through degree {spec.degree}, needed {N}')

    return TruncatedSpace(spec=spec, N=N, fiber_dim=fiber_dim)

# --- POLYNOMIALS ---

@dataclass(eq=False)
class PolyFn:
    '''
    Fiber valued polynomial of a truncated space, stored as dense
    coefficients [n_basis x fiber_dim] in graded lexicographic order.
    '''

    space  : TruncatedSpace
    coeffs : Coefficients

    def __post_init__(self):

        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128).reshape(len(self.space), self.space.fiber_dim)

    # --- FACTORIES ---

    @classmethod
    def zeros(cls, space: TruncatedSpace) -> PolyFn:

        return cls(space=space, coeffs=np.zeros((len(space), space.fiber_dim), dtype=np.complex128))

    @classmethod
    def from_terms(
        cls,
        space : TruncatedSpace,
        terms : Mapping[MultiIndex, Any],
        fiber : FiberVector | None = None
    ) -> PolyFn:
        '''
        Build a polynomial from a mapping multi-index -> coefficient. Coefficients are
        scalars (multiplied by the fiber vector, by default the first basis vector of D)
        or fiber vectors.

        :raises DegreeOverflowError: If some monomial exceeds the degree of the space.
        '''

        fiber = np.eye(space.fiber_dim)[0] if fiber is None else np.asarray(fiber, dtype=np.complex128)
        poly  = cls.zeros(space)

        for k, c in terms.items():

            if len(k) != space.d:
                raise ValueError(f'Monomial {k} does not have {space.d} variables')

            if sum(k) > space.N:
                raise DegreeOverflowError(f'Monomial {monomial_label(k)} exceeds the truncation degree {space.N}')

            value = np.asarray(complex(c) if np.isscalar(c) or isinstance(c, Fraction) else c, dtype=np.complex128)
            poly.coeffs[space.index[k]] += value * fiber if value.ndim == 0 else value

        return poly

    @classmethod
    def monomial(cls, space: TruncatedSpace, k: MultiIndex, fiber: FiberVector | None = None) -> PolyFn:

        return cls.from_terms(space, {k: 1}, fiber=fiber)

    @classmethod
    def constant(cls, space: TruncatedSpace, value: complex | FiberVector = 1) -> PolyFn:

        return cls.from_terms(space, {(0,) * space.d: value})

    @classmethod
    def from_whitened(cls, space: TruncatedSpace, v: NDArray) -> PolyFn:
        ''' Polynomial from its flat orthonormal coordinates. '''

        return cls(space=space, coeffs=np.asarray(v).reshape(len(space), space.fiber_dim) / space.sqrt_weights[:, None])

    # --- MAGIC METHODS ---

    def __add__(self, other: PolyFn) -> PolyFn:
        self._check(other)
        return PolyFn(space=self.space, coeffs=self.coeffs + other.coeffs)

    def __sub__(self, other: PolyFn) -> PolyFn:
        self._check(other)
        return PolyFn(space=self.space, coeffs=self.coeffs - other.coeffs)

    def __mul__ (self, c: complex) -> PolyFn: return PolyFn(space=self.space, coeffs=self.coeffs * c)
    def __rmul__(self, c: complex) -> PolyFn: return self * c
    def __neg__ (self)             -> PolyFn: return self * -1

    def __str__(self) -> str:

        terms = [
            f'({c[0]:.4g})*{monomial_label(k)}' if self.space.fiber_dim == 1 else f'{c}*{monomial_label(k)}'
            for k, c in zip(self.space.basis, self.coeffs) if np.any(c != 0)
        ]
        return ' + '.join(terms) if terms else '0'

    def __repr__(self) -> str: return f'PolyFn[{self.space}; {self}]'

    # --- PROPERTIES ---

    @property
    def degree(self) -> int:
        ''' Total degree, 0 for the zero polynomial. '''

        nonzero = np.flatnonzero(np.any(self.coeffs != 0, axis=1))
        return int(self.space.degrees[nonzero].max()) if len(nonzero) else 0

    @property
    def is_zero(self) -> bool: return not np.any(self.coeffs != 0)

    # --- UTILITIES ---

    def _check(self, other: PolyFn):

        if not (self.space is other.space or (self.space.compatible(other.space) and self.space.N == other.space.N)):
            raise ValueError(f'Space mismatch: {self.space} and {other.space}')

    def whitened(self) -> NDArray[np.complex128]:
        ''' Flat orthonormal coordinates sqrt(w_k) * coef_{k, j}. '''

        return (self.coeffs * self.space.sqrt_weights[:, None]).reshape(-1)

    def norm(self) -> float:
        ''' Norm in H(k, D). '''

        return float(np.sqrt(poly_inner(self, self).real))

    def embed(self, space: TruncatedSpace) -> PolyFn:
        '''
        Same function in a compatible space of different degree.

        :raises DegreeOverflowError: If the polynomial does not fit in the target degree.
        '''

        if not self.space.compatible(space):
            raise ValueError(f'Cannot embed a polynomial of {self.space} into {space}')

        if self.degree > space.N:
            raise DegreeOverflowError(f'Polynomial of degree {self.degree} does not fit in degree {space.N}')

        # Graded bases are prefixes of each other
        n      = min(len(self.space), len(space))
        coeffs = np.zeros((len(space), space.fiber_dim), dtype=np.complex128)
        coeffs[:n] = self.coeffs[:n]

        return PolyFn(space=space, coeffs=coeffs)

    def homogeneous_part(self, n: int) -> PolyFn:
        ''' The degree-n homogeneous component. '''

        mask = (self.space.degrees == n)[:, None]
        return PolyFn(space=self.space, coeffs=self.coeffs * mask)

    def __call__(self, point: Any) -> FiberVector: return point_eval(self, point)


def random_poly(
    space  : TruncatedSpace,
    rng    : np.random.Generator,
    degree : int | None = None,
    homogeneous: bool = False
) -> PolyFn:
    '''
    Polynomial with standard complex Gaussian coefficients up to the given degree,
    or only in that degree when `homogeneous` is set.
    '''

    degree = space.N if degree is None else degree
    mask   = (space.degrees == degree) if homogeneous else (space.degrees <= degree)
    shape  = (len(space), space.fiber_dim)
    coeffs = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * mask[:, None]

    return PolyFn(space=space, coeffs=coeffs)

# --- TEXT FORM ---

def parse_poly(text: str, space: TruncatedSpace, fiber: FiberVector | None = None) -> PolyFn:
    '''
    Parse a polynomial in the variables z1..zd, e.g. `z1 - 1/2*z2` or `z1^2*z2`.
    Rational literals are kept exact until the coefficients are stored.

    :param text: Polynomial text.
    :type text: str
    :param space: Truncated space the polynomial lives in.
    :type space: TruncatedSpace
    :param fiber: Direction of D multiplying the scalar polynomial, defaults to the first one.
    :type fiber: FiberVector | None, optional
    :raises PolyParseError: On syntax errors or unknown variables.
    :raises DegreeOverflowError: If the polynomial exceeds the truncation degree.
    '''

    return PolyFn.from_terms(space, parse_terms(text, space.d), fiber=fiber)


def parse_generators(text: str, space: TruncatedSpace) -> List[PolyFn]:
    '''
    Parse a comma separated list of generators. With a fiber of dimension D > 1 an item
    is either a vector `p_1 | ... | p_D` of scalar polynomials, one per direction of D,
    or a scalar polynomial g standing for the D generators g e_1, ..., g e_D.

    :raises ConfigError: If a vector item does not have D components.
    '''

    D    = space.fiber_dim
    eye  = np.eye(D)
    gens = []

    for item in split_poly_list(text):

        if '|' not in item:
            gens.extend(parse_poly(item, space, fiber=eye[j]) for j in range(D))
            continue

        parts = [p.strip() for p in item.split('|')]
        if len(parts) != D:
            raise ConfigError(field='generators', msg=f'Generator `{item}` has {len(parts)} components, expected {D}')

        gen = PolyFn.zeros(space)
        for j, part in enumerate(parts):
            if part != '0':
                gen = gen + parse_poly(part, space, fiber=eye[j])
        gens.append(gen)

    return gens


def poly_inner(p: PolyFn, q: PolyFn) -> complex:
    '''
    Inner product <p, q> = Σ_k w_k <p_k, q_k>_D, linear in the first argument.

    :raises ValueError: On space mismatch.
    '''

    p._check(q)
    return complex(np.sum(p.space.weights[:, None] * p.coeffs * q.coeffs.conj()))


def point_eval(p: PolyFn, lam: Any) -> FiberVector:
    ''' Value p(λ) in the fiber D. '''

    lam = as_point(lam, p.space.d)
    return p.space.monomials(lam) @ p.coeffs


def poly_multiply(p: PolyFn, q: PolyFn, target: TruncatedSpace | None = None) -> PolyFn:
    '''
    Exact product of a scalar polynomial p and a fiber valued polynomial q.

    :param p: Scalar polynomial.
    :type p: PolyFn
    :param q: Polynomial with any fiber.
    :type q: PolyFn
    :param target: Space of the product, defaults to the degree deg p + deg q.
    :type target: TruncatedSpace | None, optional
    :raises DegreeOverflowError: If the target degree is smaller than deg p + deg q.
    :return: The product p q.
    :rtype: PolyFn
    '''

    if p.space.fiber_dim != 1:
        raise ValueError('The left factor of a product must be scalar valued')

    if not p.space.spec.same_kernel(q.space.spec):
        raise ValueError(f'Kernel mismatch: {p.space.spec} and {q.space.spec}')

    degree = p.degree + q.degree

    if target is None:
        target = build_space(q.space.spec, max(degree, q.space.N), q.space.fiber_dim)

    if target.N < degree:
        raise DegreeOverflowError(f'Product of degree {degree} does not fit in degree {target.N}')

    out = PolyFn.zeros(target)

    for i in np.flatnonzero(p.coeffs[:, 0] != 0):
        k = p.space.basis[i]
        for j in np.flatnonzero(np.any(q.coeffs != 0, axis=1)):
            m = q.space.basis[j]
            out.coeffs[target.index[tuple(np.add(k, m))]] += p.coeffs[i, 0] * q.coeffs[j]

    return out


def multiplication_matrix(phi: PolyFn, source: TruncatedSpace, target: TruncatedSpace) -> NDArray[np.complex128]:
    '''
    Matrix of M_phi from the source to the target space in orthonormal monomial coordinates.

    :raises DegreeOverflowError: If target.N < source.N + deg phi.
    '''

    if phi.space.fiber_dim != 1:
        raise ValueError('Multiplier symbols must be scalar valued')

    if target.N < source.N + phi.degree:
        raise DegreeOverflowError(f'M_phi maps degree {source.N} into degree {source.N + phi.degree}, target has {target.N}')

    M = np.zeros((len(target), len(source)), dtype=np.complex128)

    for i in np.flatnonzero(phi.coeffs[:, 0] != 0):
        k = phi.space.basis[i]
        for s, m in enumerate(source.basis):
            t = target.index[tuple(np.add(k, m))]
            M[t, s] += phi.coeffs[i, 0] * np.sqrt(target.weights[t] / source.weights[s])

    return np.kron(M, np.eye(source.fiber_dim))

# --- KERNEL EVALUATION ---

@dataclass
class KernelValue:
    '''
    Value of k_λ(z). `partial` is the sum through the requested degree and `tail_bound`
    bounds |value - partial|; it is a heuristic estimate when `rigorous` is false.
    '''

    value       : complex
    partial     : complex
    tail_bound  : float
    closed_form : bool
    rigorous    : bool = True


def _closed_form_value(spec: KernelSpec, s: complex) -> complex:

    match spec.closed_form:

        case ClosedForm.Szego:
            return 1 / (1 - s)

        case ClosedForm.Dirichlet:
            if s == 0:
                return 1 + 0j
            alpha = mpmath.mpf(spec.alpha.numerator) / spec.alpha.denominator
            return complex(mpmath.polylog(alpha, mpmath.mpc(s.real, s.imag))) / s


def kernel_tail_bound(spec: KernelSpec, r: float, N: int) -> float | None:
    '''
    Rigorous bound on Σ_{n>N} a_n r^n for the tagged kernels with nonincreasing
    coefficients, None when no bound is available.
    For boundary convergent Dirichlet kernels the integral bound N^(1-alpha) / (alpha-1)
    holds uniformly in r <= 1.
    '''

    bounds = []

    if spec.closed_form == ClosedForm.Szego and r < 1:
        bounds.append(r ** (N + 1) / (1 - r))

    if spec.closed_form == ClosedForm.Dirichlet and spec.alpha >= 0:

        alpha = float(spec.alpha)

        if r < 1:
            bounds.append((N + 2) ** (-alpha) * r ** (N + 1) / (1 - r))

        if alpha > 1 and N >= 1:
            bounds.append(N ** (1 - alpha) / (alpha - 1))

    return min(bounds) if bounds else None


def kernel_eval(spec: KernelSpec, lam: Any, z: Any, N: int | None = None) -> KernelValue:
    '''
    Evaluate k_λ(z) = Σ a_n <z, λ>^n.

    Tagged kernels use their closed form, untagged ones the partial sum through degree N
    with a heuristic geometric tail estimate. Boundary evaluation |<z, λ>| = 1 is accepted
    only for boundary convergent kernels (Dirichlet with alpha > 1).

    :param spec: Kernel.
    :type spec: KernelSpec
    :param lam: Point λ of the closed ball.
    :param z: Point z of the closed ball.
    :param N: Degree of the partial sum, defaults to the kernel degree.
    :type N: int | None, optional
    :raises KernelDomainError: Outside the closed ball or for divergent boundary evaluation.
    :return: The kernel value with partial sum and tail bound.
    :rtype: KernelValue
    '''

    N   = spec.degree if N is None else N
    lam = as_point(lam, spec.d)
    z   = as_point(z,   spec.d)

    if N > spec.degree:
        raise ValueError(f'Kernel {spec.name} has coefficients through degree {spec.degree}, requested {N}')

    for name, p in [('lambda', lam), ('z', z)]:
        if np.linalg.norm(p) > 1 + BOUNDARY_TOL:
            raise KernelDomainError(f'Point {name} = {p} outside the closed unit ball')

    s = complex(np.vdot(lam, z))
    r = abs(s)

    if r > 1 + BOUNDARY_TOL:
        raise KernelDomainError(f'Pairing <z, λ> = {s} outside the closed unit disc')

    if r >= 1 - BOUNDARY_TOL:

        if not spec.is_boundary_convergent:
            raise KernelDomainError(f'Kernel {spec.name} diverges at <z, λ> = {s}')

        # Rounding may leave boundary pairings slightly off the circle
        s, r = s / r, 1.

    partial = complex(np.dot(spec.a_float[:N + 1], s ** np.arange(N + 1)))

    if spec.closed_form is not None:

        value = _closed_form_value(spec, s)
        bound = kernel_tail_bound(spec, min(r, 1.), N)

        return KernelValue(
            value=value, partial=partial, closed_form=True,
            tail_bound=bound if bound is not None else abs(value - partial),
        )

    # Geometric extrapolation of the last coefficient ratio
    a = spec.a_float
    if N == 0 or a[N] == 0 or r == 0:
        estimate = 0. if r == 0 else float('inf')
    else:
        rho      = a[N] / a[N - 1] * r
        estimate = a[N] * r ** (N + 1) / (1 - rho) if rho < 1 else float('inf')

    return KernelValue(value=partial, partial=partial, tail_bound=estimate, closed_form=False, rigorous=False)


def kernel_tail(space: TruncatedSpace, lam: Any, N: int | None = None) -> float:
    '''
    Relative truncation tail (k_λ(λ) - ||P_N k_λ||^2) / k_λ(λ) at λ, with N the degree
    of the space unless given. It drives every truncation budget of radial scans and quadratures.
    '''

    kv = kernel_eval(space.spec, lam, lam, N=space.N if N is None else N)

    tail = (kv.value - kv.partial).real if kv.closed_form else kv.tail_bound
    return max(float(tail), 0.) / kv.value.real


def kvec(space: TruncatedSpace, lam: Any, x: FiberVector | None = None) -> PolyFn:
    '''
    Truncation to degree N of the kernel function k_λ x, whose coefficients are
    a_|k| (|k|!/k!) conj(λ)^k x. It reproduces the values of the polynomials of degree at most N:
    <f, kvec(λ) x> = <f(λ), x>.

    :param space: Truncated space.
    :type space: TruncatedSpace
    :param lam: Point λ.
    :param x: Fiber vector, defaults to the first basis vector of D.
    :type x: FiberVector | None, optional
    '''

    lam = as_point(lam, space.d)
    x   = np.eye(space.fiber_dim)[0] if x is None else np.asarray(x, dtype=np.complex128)

    scalar = space.monomials(lam).conj() / space.weights
    return PolyFn(space=space, coeffs=np.outer(scalar, x))


def kvec_block(space: TruncatedSpace, points: Point | Points) -> NDArray[np.complex128]:
    '''
    Orthonormal coordinates of the kernel functions k_λ e_j for all the fiber directions,
    as a block [dim x fiber_dim] for a single point or [n_points x dim x fiber_dim] for a batch.
    '''

    scalar = space.monomials(points).conj() / space.sqrt_weights
    eye    = np.eye(space.fiber_dim)

    if scalar.ndim == 1:
        return np.kron(scalar[:, None], eye)

    return np.einsum('pb,jk->pbjk', scalar, eye).reshape(scalar.shape[0], space.dim, space.fiber_dim)

# --- EXTREMAL FUNCTIONS AND MULTIPLIERS ---

def extremal_one_point(spec: KernelSpec, lam: Any, N: int) -> PolyFn:
    '''
    Truncation to degree N of the one point extremal function

        phi_λ(z) = (1 - k_λ(z) / k_λ(λ)) / sqrt(1 - 1 / k_λ(λ))

    which vanishes at λ, has norm one and maximizes Re f(0) among such functions.
    The diagonal value k_λ(λ) is the full kernel value, so phi_λ(0) is exact.

    :raises ValueError: If λ = 0.
    '''

    lam = as_point(lam, spec.d)

    if not np.any(lam):
        raise ValueError('The one point extremal function is defined for λ != 0')

    space = build_space(spec, N)
    k_ll  = kernel_eval(spec, lam, lam).value.real

    phi = (PolyFn.constant(space) - kvec(space, lam) * (1 / k_ll)) * (1 / np.sqrt(1 - 1 / k_ll))
    return phi


@dataclass
class MultiplierReport:
    ''' Largest observed ratio ||phi f|| / ||f|| over a family of test functions. '''

    max_ratio   : float
    n_tested    : int
    contractive : bool


def contractive_multiplier_check(
    spec     : KernelSpec,
    phi      : PolyFn,
    test_fns : Sequence[PolyFn],
    N        : int,
    tol      : float = CONTRACTIVE_TOL
) -> MultiplierReport:
    '''
    Check contractivity of M_phi on a family of test functions: products are computed
    exactly in the space of degree N.

    :raises DegreeOverflowError: If deg phi + deg f > N for some test function.
    '''

    target = build_space(spec, N, phi.space.fiber_dim if not test_fns else test_fns[0].space.fiber_dim)

    ratios = []
    for f in test_fns:
        if f.is_zero:
            continue
        ratios.append(poly_multiply(phi, f, target).norm() / f.norm())

    max_ratio = max(ratios, default=0.)
    return MultiplierReport(max_ratio=max_ratio, n_tested=len(ratios), contractive=max_ratio <= 1 + tol)


def multiplier_norm_lower(spec: KernelSpec, phi: PolyFn, N: int) -> float:
    '''
    Lower bound for the multiplier norm of phi: the norm of M_phi restricted to the
    polynomials of degree at most N, i.e. the largest singular value of its exact matrix
    into the degree N + deg phi. It is nondecreasing in N.
    '''

    source = build_space(spec, N)
    target = build_space(spec, N + phi.degree)

    return float(svdvals(multiplication_matrix(phi, source, target))[0])


def kernel_product_chain(spec: KernelSpec, f: PolyFn, lam: Any, N: int) -> Tuple[float, float, float]:
    '''
    The chain ||f(λ)||^2 <= ||k_λ f||^2 / ||k_λ||^2 <= 2 Re<f, k_λ f> - ||f||^2,
    with k_λ truncated at degree N and products computed exactly in degree N + deg f.

    :raises DegreeOverflowError: If the kernel has less than N + deg f coefficients.
    :return: The three members of the chain.
    :rtype: Tuple[float, float, float]
    '''

    lam = as_point(lam, spec.d)

    if spec.degree < N + f.degree:
        raise DegreeOverflowError(f'Kernel {spec.name} has coefficients through degree {spec.degree}, needed {N + f.degree}')

    kernel_space  = build_space(spec, N)
    product_space = build_space(spec, N + f.degree, f.space.fiber_dim)

    k    = kvec(kernel_space, lam)
    kf   = poly_multiply(k, f, product_space)
    f_up = f.embed(product_space)

    first  = float(np.sum(np.abs(point_eval(f, lam)) ** 2))
    second = kf.norm() ** 2 / k.norm() ** 2
    third  = 2 * poly_inner(f_up, kf).real - f.norm() ** 2

    return first, second, third


def fejer_means(phi: PolyFn, n: int) -> PolyFn:
    '''
    Fejér mean of order n, Σ_{j<=n} (1 - j/(n+1)) phi_j, with phi_j the homogeneous
    components; it is the circle average of phi(e^{it} z) against the mass-one Fejér kernel.
    '''

    if n < 0:
        raise ValueError(f'Fejér order must be nonnegative, got {n}')

    weights = np.clip(1 - phi.space.degrees / (n + 1), 0, None)
    return PolyFn(space=phi.space, coeffs=phi.coeffs * weights[:, None])

# --- SPHERE ---

def hardy_sphere_norm(p: PolyFn) -> float:
    '''
    Squared norm in H^2 of the sphere, Σ_k |c_k|^2 (d-1)! k! / (d-1+|k|)!.
    '''

    space = p.space
    d     = space.d

    sphere_w = np.array([1. / (multinomial(k) * comb(d - 1 + sum(k), d - 1, exact=True)) for k in space.basis])
    return float(np.sum(sphere_w[:, None] * np.abs(p.coeffs) ** 2))


def sample_sphere(d: int, n: int, rng: np.random.Generator) -> Points:
    '''
    Uniform samples on the unit sphere of C^d obtained by normalizing
    standard complex Gaussian vectors.
    '''

    g = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sphere_monte_carlo_norm(p: PolyFn, samples: int, seed: int = 0) -> Tuple[float, float]:
    '''
    Monte Carlo estimate of the squared H^2 sphere norm of p.

    :return: Estimate and its standard error.
    :rtype: Tuple[float, float]
    '''

    rng    = np.random.default_rng(seed)
    pts    = sample_sphere(p.space.d, samples, rng)
    values = np.sum(np.abs(p.space.monomials(pts) @ p.coeffs) ** 2, axis=1)

    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(samples))


def coordinate_shift_excess(p: PolyFn) -> Tuple[float, float]:
    '''
    Observed and predicted value of Σ_i ||z_i p||^2 - ||p||^2 for a homogeneous p of
    degree n, the prediction being ((a_n / a_{n+1}) (n+d)/(n+1) - 1) ||p||^2.

    :raises ValueError: If p is not homogeneous.
    '''

    space = p.space
    n     = p.degree

    if not np.all(p.coeffs[space.degrees != n] == 0):
        raise ValueError('Coordinate shift excess is defined for homogeneous polynomials')

    target = build_space(space.spec, max(space.N, n + 1), space.fiber_dim)
    scalar = build_space(space.spec, 1)

    shifted = sum(
        poly_multiply(PolyFn.monomial(scalar, tuple(int(i == j) for j in range(space.d))), p, target).norm() ** 2
        for i in range(space.d)
    )

    a         = space.spec.a_float
    norm2     = p.norm() ** 2
    observed  = shifted - norm2
    predicted = ((a[n] / a[n + 1]) * (n + space.d) / (n + 1) - 1) * norm2

    return observed, predicted

# --- PICK MATRICES ---

def np_pick_matrix(spec: KernelSpec, points: Sequence[Any]) -> Tuple[Matrix, float]:
    '''
    Matrix G_ij = 1 - 1/k_{λ_j}(λ_i) and its minimum eigenvalue, which is nonnegative
    for complete Nevanlinna-Pick kernels.

    :raises NumericalContractError: If some kernel value vanishes.
    '''

    pts = [as_point(p, spec.d) for p in points]

    if not pts:
        raise ValueError('Pick matrix needs at least one point')

    n = len(pts)
    G = np.zeros((n, n), dtype=np.complex128)

    for i in range(n):
        for j in range(n):
            k = kernel_eval(spec, pts[j], pts[i]).value
            if k == 0:
                raise NumericalContractError('Vanishing kernel value in the Pick matrix', value=(i, j))
            G[i, j] = 1 - 1 / k

    G = hermitian_part(G)
    return G, float(eigvalsh(G)[0])


def np_psd_check(spec: KernelSpec, points: Sequence[Any], tol: float = 1e-12) -> bool:
    ''' Whether the Pick matrix of the sample points is positive semidefinite within tolerance. '''

    _, min_eig = np_pick_matrix(spec, points)
    return min_eig >= -tol
