'''
This module implements truncated models of multiplier invariant subspaces M of H(k, D).

A model keeps an orthonormal basis of M_N, the part of M made of polynomials of degree
at most N, together with its projection. Two encodings of M are supported:
- generators: M is the invariant subspace generated by a list of polynomials and M_N is
  spanned by the products z^k g with |k| + deg g <= N;
- point-zero: M = {f : f(z0) = 0} and M_N is the orthogonal complement of the kernel
  functions at z0 in the truncated space. Boundary points are allowed for the kernels
  that converge on the closed ball.

On top of the models the module computes the ratio ||P_M k_λ||^2 / ||k_λ||^2, its radial
scans toward the boundary, the extremal solution P_M 1 / sqrt((P_M 1)(0)) and the
closed form boundary values of the point-zero subspaces of the Dirichlet kernels.
'''

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Sequence

import mpmath
import numpy as np
import pandas as pd
from numpy.typing import NDArray
from scipy.linalg import eigvalsh, null_space, qr, svdvals

from innerlab.kernelspace import (
    BOUNDARY_TOL, KernelSpec, PolyFn, TruncatedSpace, kernel_eval, kernel_tail, kvec_block,
)
from innerlab.utils.errors import DegreeOverflowError, KernelDomainError, TruncationBudgetError
from innerlab.utils.logger import Logger, SilentLogger
from innerlab.utils.misc import as_point, hermitian_part
from innerlab.utils.types import Grid, Matrix, Point

RANK_TOL   = 1e-10
''' Threshold on the pivots of the rank revealing orthonormalization. '''

TAIL_BUDGET = 1e-8
''' Default largest relative kernel tail accepted at a sampled point. '''

# --- MODEL ---

@dataclass(eq=False)
class SubspaceModel:
    '''
    Truncated model M_N of an invariant subspace. Matrices act on the flat orthonormal
    coordinates of the truncated space.
    '''

    space       : TruncatedSpace
    basis       : Matrix
    ''' Orthonormal basis of M_N as columns [dim x dim M_N]. '''
    complement  : Matrix
    '''
    Compression to the truncated space of the projection onto the orthogonal
    complement of M. For generator models it is approximated by I - P_{M_N}.
    '''
    generators  : List[PolyFn] = field(default_factory=list)
    z0          : Point | None = None
    description : str = ''

    # --- MAGIC METHODS ---

    def __str__(self) -> str:
        return f'SubspaceModel[{self.description}; {self.space}; dim M_N: {self.dim}]'

    def __repr__(self) -> str: return str(self)

    # --- PROPERTIES ---

    @property
    def dim(self) -> int: return self.basis.shape[1]

    @property
    def kind(self) -> str: return 'point-zero' if self.z0 is not None else 'generators'

    @property
    def projection(self) -> Matrix:
        ''' Orthogonal projection onto M_N. '''

        return self.basis @ self.basis.conj().T

    def to_json(self) -> Dict[str, Any]:

        return {
            'kind'        : self.kind,
            'description' : self.description,
            'spec'        : self.space.spec.name,
            'd'           : self.space.d,
            'N'           : self.space.N,
            'fiber_dim'   : self.space.fiber_dim,
            'dim'         : self.dim,
        }


def _orthonormal_columns(A: NDArray, tol: float = RANK_TOL) -> Matrix:
    '''
    Orthonormal basis of the column span of A by QR with column pivoting on the
    normalized columns. Pivots below `tol` are dropped; ties are resolved in
    favour of the first column, so the basis is deterministic.
    '''

    norms = np.linalg.norm(A, axis=0)
    A     = A[:, norms > 0] / norms[norms > 0]

    if A.shape[1] == 0:
        return np.zeros((A.shape[0], 0), dtype=np.complex128)

    Q, R, _ = qr(A, mode='economic', pivoting=True)
    rank    = int(np.sum(np.abs(np.diag(R)) > tol))

    return Q[:, :rank]


def build_submodule(
    space      : TruncatedSpace,
    generators : Sequence[PolyFn],
    description: str = '',
    logger     : Logger = SilentLogger()
) -> SubspaceModel:
    '''
    Model of the invariant subspace generated by a list of polynomials.
    M_N is spanned by z^k g, |k| + deg g <= N, enumerated generator by generator
    and in graded lexicographic order of the monomial z^k.

    :param space: Truncated space.
    :type space: TruncatedSpace
    :param generators: Generators living in `space`.
    :type generators: Sequence[PolyFn]
    :param description: Text description stored in the model, e.g. the generators text.
    :type description: str, optional
    :raises ValueError: If all the generators vanish.
    :raises DegreeOverflowError: If a generator exceeds the truncation degree.
    :return: The model with its orthonormal basis.
    :rtype: SubspaceModel
    '''

    gens = [g if g.space is space else g.embed(space) for g in generators]
    gens = [g for g in gens if not g.is_zero]

    if not gens:
        raise ValueError('At least one nonzero generator is required')

    columns = []
    D       = space.fiber_dim

    for g in gens:

        if g.degree > space.N:
            raise DegreeOverflowError(f'Generator of degree {g.degree} exceeds the truncation degree {space.N}')

        v = g.whitened().reshape(len(space), D)

        for k in space.basis:

            if sum(k) + g.degree > space.N:
                break

            src, dst, scale = space.shift_indices(k)
            col = np.zeros_like(v)
            col[dst] = scale[:, None] * v[src]
            columns.append(col.reshape(-1))

    B = _orthonormal_columns(np.stack(columns, axis=1))

    logger.info(f'Submodule {description or "<generators>"}: {len(columns)} spanning products, dim M_N = {B.shape[1]} of {space.dim}')

    return SubspaceModel(
        space=space,
        basis=B,
        complement=np.eye(space.dim) - B @ B.conj().T,
        generators=list(gens),
        description=description,
    )


def point_zero_submodule(
    space  : TruncatedSpace,
    z0     : Any,
    logger : Logger = SilentLogger()
) -> SubspaceModel:
    '''
    Model of M = {f : f(z0) = 0}. M_N is the orthogonal complement of the truncated kernel
    functions P_N k_{z0} e_j; the compressed complement is (P_N k_{z0})(P_N k_{z0})^* / k_{z0}(z0),
    with the diagonal kernel value evaluated in closed form when available.

    :param space: Truncated space.
    :type space: TruncatedSpace
    :param z0: Point of the closed ball. Boundary points need a kernel converging on the closed ball.
    :raises KernelDomainError: If k_{z0} is not in the space.
    :return: The point-zero model.
    :rtype: SubspaceModel
    '''

    z0 = as_point(z0, space.d)

    # Raises on boundary points of divergent kernels
    K = kernel_eval(space.spec, z0, z0).value.real

    U = kvec_block(space, z0)
    B = null_space(U.conj().T)

    desc = 'f(' + ','.join(f'{complex(c):g}'.strip('()') for c in z0) + ') = 0'
    logger.info(f'Submodule {desc}: dim M_N = {B.shape[1]} of {space.dim}, k(z0, z0) = {K:.10g}')

    return SubspaceModel(
        space=space,
        basis=B,
        complement=U @ U.conj().T / K,
        z0=z0,
        description=desc,
    )


def point_zero_generators(space: TruncatedSpace, z0: Any) -> List[PolyFn]:
    ''' Generators z_i - (z0)_i of the point-zero subspace at an interior point, along every fiber direction. '''

    z0   = as_point(z0, space.d)
    gens = []

    for j in range(space.fiber_dim):
        fiber = np.eye(space.fiber_dim)[j]
        for i in range(space.d):
            e = tuple(int(i == m) for m in range(space.d))
            gens.append(PolyFn.from_terms(space, {e: 1, (0,) * space.d: -z0[i]}, fiber=fiber))

    return gens


def blaschke_generator(space: TruncatedSpace, zeros: Sequence[complex]) -> PolyFn:
    '''
    Polynomial generator Π (z - a_j) of the subspace B H^2 on the disc, B being the
    Blaschke product with the given zeros: the denominators of the Blaschke factors are
    invertible multipliers and do not change the generated subspace.
    '''

    if space.d != 1:
        raise ValueError(f'Blaschke generators live on the disc, got d = {space.d}')

    # numpy lists the coefficients from the highest degree
    coeffs = np.poly(np.asarray(zeros, dtype=np.complex128))[::-1]

    return PolyFn.from_terms(space, {(n,): c for n, c in enumerate(np.atleast_1d(coeffs))})

# --- RATIO ---

@dataclass
class RatioValue:

    ratio      : float
    tail_bound : float
    ''' Relative truncation tail of the kernel function at the point. '''


def _interior(space: TruncatedSpace, lam: Any) -> Point:

    lam = as_point(lam, space.d)

    if np.linalg.norm(lam) >= 1:
        raise KernelDomainError(f'Point {lam} outside the open unit ball')

    return lam


def ratio_report(model: SubspaceModel, lam: Any) -> RatioValue:
    '''
    Ratio ||P_M k_λ x||^2 / ||k_λ x||^2 maximized over unit fiber vectors x, i.e. the squared
    norm of φ(λ) for an inner multiplier of M. It equals Σ |φ_n(λ)|^2 for scalar spaces.
    The numerator uses P_{M_N} k_λ = P_{M_N} P_N k_λ, the denominator the full kernel value.
    '''

    space = model.space
    lam   = _interior(space, lam)

    K = kernel_eval(space.spec, lam, lam).value.real
    V = model.basis.conj().T @ kvec_block(space, lam)

    top = eigvalsh(hermitian_part(V.conj().T @ V))[-1] if model.dim else 0.

    return RatioValue(ratio=float(max(top, 0.)) / K, tail_bound=kernel_tail(space, lam))


def ratio(model: SubspaceModel, lam: Any) -> float:
    ''' Ratio ||P_M k_λ||^2 / ||k_λ||^2 at an interior point, in [0, 1]. '''

    return ratio_report(model, lam).ratio


def radial_scan(
    model  : SubspaceModel,
    z      : Any,
    t_grid : Grid,
    budget : float = TAIL_BUDGET,
    logger : Logger = SilentLogger()
) -> pd.DataFrame:
    '''
    Ratio along the radius t z toward the boundary point z.

    :param model: Subspace model.
    :type model: SubspaceModel
    :param z: Unit vector.
    :param t_grid: Radii in [0, 1).
    :type t_grid: Grid
    :param budget: Largest accepted relative kernel tail, defaults to 1e-8.
    :type budget: float, optional
    :raises TruncationBudgetError: If some radius is too close to one for the truncation degree.
    :return: Table with columns t, ratio and tail_bound.
    :rtype: pd.DataFrame
    '''

    z = unit_direction(model.space, z)

    rows = []
    for t in t_grid:

        r = ratio_report(model, t * z)

        if r.tail_bound > budget:
            raise TruncationBudgetError(f'Radius t = {t} beyond the truncation budget {budget:g} at N = {model.space.N}', value=r.tail_bound)

        rows.append({'t': float(t), 'ratio': r.ratio, 'tail_bound': r.tail_bound})

    logger.info(f'Radial scan of {model.description}: ratio {rows[0]["ratio"]:.6g} at t = {rows[0]["t"]:g} to {rows[-1]["ratio"]:.6g} at t = {rows[-1]["t"]:g}')

    return pd.DataFrame(rows, columns=['t', 'ratio', 'tail_bound'])


def unit_direction(space: TruncatedSpace, z: Any) -> Point:

    z = as_point(z, space.d)

    if abs(np.linalg.norm(z) - 1) > BOUNDARY_TOL:
        raise ValueError(f'Scan direction must be a unit vector, got |z| = {np.linalg.norm(z)}')

    return z

# --- CLOSED FORMS ---

@dataclass
class BoundedValue:
    ''' A value with a rigorous enclosure [lower, upper]. '''

    value : float
    lower : float
    upper : float

    def __float__(self) -> float: return self.value


def counterexample_closed_form(
    alpha : Fraction | float,
    z     : complex,
    w     : complex,
    N     : int = 10_000
) -> BoundedValue:
    '''
    Boundary value g(w) = 1 - |k_w(z)|^2 / (k_w(w) k_z(z)) of Σ |φ_n|^2 for the point-zero
    subspace M = {f : f(z) = 0} of the disc kernel a_n = (n+1)^(-alpha), alpha > 1.

    The value comes from the polylogarithm closed form k_w(z) = Li_alpha(s)/s, s = z conj(w).
    The enclosure uses partial sums of N terms with the uniform tail bound N^(1-alpha)/(alpha-1).

    :param alpha: Exponent, greater than one.
    :type alpha: Fraction | float
    :param z: Zero of the subspace, in the closed disc.
    :type z: complex
    :param w: Evaluation point, in the closed disc.
    :type w: complex
    :param N: Number of terms of the enclosure, defaults to 10^4.
    :type N: int, optional
    :raises ValueError: If alpha <= 1.
    '''

    if float(alpha) <= 1:
        raise ValueError(f'Boundary kernels need alpha > 1, got {alpha}')

    z, w = complex(z), complex(w)
    for name, p in [('z', z), ('w', w)]:
        if abs(p) > 1 + BOUNDARY_TOL:
            raise KernelDomainError(f'Point {name} = {p} outside the closed disc')

    a_mp = mpmath.mpf(Fraction(alpha).numerator) / Fraction(alpha).denominator

    def kernel(s: complex) -> complex:
        if s == 0:
            return 1 + 0j
        return complex(mpmath.polylog(a_mp, mpmath.mpc(s.real, s.imag))) / s

    k_wz = kernel(z * w.conjugate())
    k_ww = kernel(abs(w) ** 2).real
    k_zz = kernel(abs(z) ** 2).real

    value = 1 - abs(k_wz) ** 2 / (k_ww * k_zz)

    # Enclosure from partial sums
    a     = (np.arange(N + 1) + 1.) ** (-float(alpha))
    n     = np.arange(N + 1)
    tail  = N ** (1 - float(alpha)) / (float(alpha) - 1)

    p_wz = abs(np.dot(a, (z * w.conjugate()) ** n))
    p_ww = float(np.dot(a, abs(w) ** (2 * n)))
    p_zz = float(np.dot(a, abs(z) ** (2 * n)))

    lower = 1 - (p_wz + tail) ** 2 / (p_ww * p_zz)
    upper = 1 - max(p_wz - tail, 0.) ** 2 / ((p_ww + tail) * (p_zz + tail))

    return BoundedValue(value=float(value), lower=float(lower), upper=float(upper))

# --- EXTREMAL SOLUTION ---

def extremal_solution(model: SubspaceModel, tol: float = 1e-12) -> PolyFn:
    '''
    Solution phi_M = P_M 1 / sqrt((P_M 1)(0)) of the extremal problem sup Re f(0)
    over the unit ball of M. The constant is taken along the first fiber direction.

    :raises ValueError: If every function of M_N vanishes at the origin.
    '''

    space = model.space
    P     = model.projection

    one   = np.zeros(space.dim, dtype=np.complex128)
    one[0] = 1.

    p_one = P @ one
    at_0  = float(p_one[0].real)

    if at_0 <= tol:
        raise ValueError(f'Degenerate extremal problem, (P_M 1)(0) = {at_0:.3e}')

    return PolyFn.from_whitened(space, p_one / np.sqrt(at_0))

# --- EVALUATION ---

def evaluation_dimension(model: SubspaceModel, lam: Any, tol: float = 1e-7) -> int:
    '''
    Dimension of {f(λ) : f in M_N}, the rank of the evaluation map on M_N. Singular values
    are normalized by the norm of the truncated kernel function before thresholding.
    '''

    space = model.space
    lam   = as_point(lam, space.d)

    if model.dim == 0:
        return 0

    U = kvec_block(space, lam)
    s = svdvals(U.conj().T @ model.basis) / np.linalg.norm(U[:, 0])

    return int(np.sum(s > tol))


def annihilates_quotient(model: SubspaceModel, p: PolyFn, tol: float = 1e-9) -> bool:
    '''
    Whether the scalar multiplier p maps the whole space into M, i.e. p e_j lies in M_N
    for every fiber direction e_j.

    :raises DegreeOverflowError: If deg p exceeds the truncation degree.
    '''

    space = model.space

    if p.degree > space.N:
        raise DegreeOverflowError(f'Multiplier of degree {p.degree} exceeds the truncation degree {space.N}')

    if p.space.fiber_dim != 1 or not p.space.spec.same_kernel(space.spec):
        raise ValueError(f'Expected a scalar polynomial of the kernel {space.spec.name}')

    # Graded bases are prefixes of each other
    n      = min(len(p.space), len(space))
    scalar = np.zeros(len(space), dtype=np.complex128)
    scalar[:n] = p.coeffs[:n, 0]

    P = model.projection

    for j in range(space.fiber_dim):

        v = PolyFn(space=space, coeffs=np.outer(scalar, np.eye(space.fiber_dim)[j])).whitened()

        if np.linalg.norm(v - P @ v) > tol * max(np.linalg.norm(v), 1.):
            return False

    return True
