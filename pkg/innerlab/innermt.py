'''
This module implements the construction of the inner multiplication operator of an
invariant subspace M of H(k, D) at truncation scale.

For a complete Nevanlinna-Pick kernel with representation coefficients {b_n}, the map

    Q(A) = Σ_k c_k M_{z^k} A M_{z^k}^*,        c_k = b_|k| |k|! / k!

is completely positive, P_M - Q(P_M) is positive and with S = (P_M - Q(P_M))^(1/2),
E = range(S), the formula φ(λ)^* x = S(k_λ x) defines a multiplier φ: B_d -> B(E, D)
whose multiplication operator Φ is a partial isometry with ΦΦ^* = P_M.

The module implements the Q map, the construction, the evaluation of φ, the rank profile
of φ over sample points and the radial scans of its singular values toward the boundary.
'''

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np
import pandas as pd
from numpy.typing import NDArray
from scipy.linalg import eigh, qr, svdvals

from innerlab.kernelspace import ClosedForm, TruncatedSpace, kernel_eval, kernel_tail, kvec_block, multinomial
from innerlab.series import dirichlet_mass_limit
from innerlab.subspace import TAIL_BUDGET, SubspaceModel, unit_direction
from innerlab.utils.errors import NumericalContractError, TruncationBudgetError
from innerlab.utils.logger import Logger, SilentLogger
from innerlab.utils.misc import as_point, hermitian_part
from innerlab.utils.types import Grid, Matrix, Point, Points

CLAMP_TOL   = 1e-9
''' Negative eigenvalues above -CLAMP_TOL are rounding noise and silently clamped. '''

ABORT_TOL   = 1e-6
''' Negative eigenvalues below -ABORT_TOL invalidate the construction. '''

RANGE_TOL   = 1e-10
''' Eigenvalues of S^2 above RANGE_TOL span the auxiliary space E, smaller ones are dropped from S. '''

SVD_TOL     = 1e-7
''' Default singular value threshold of the rank profile. '''

SUPPORT_TOL = 1e-10

# --- Q MAP ---

def q_map(space: TruncatedSpace, A: Matrix) -> Matrix:
    '''
    Completely positive map Q(A) = Σ_{1 <= |k| <= N} c_k T_k A T_k^* with T_k the compression
    of M_{z^k} to the truncated space. Its matrix elements are exact: terms with |k| > N vanish
    on the truncated space, and T_k A T_k^* only involves the compression of A.

    :param space: Truncated space.
    :type space: TruncatedSpace
    :param A: Operator in flat orthonormal coordinates [dim x dim].
    :type A: Matrix
    :return: Q(A) in the same coordinates.
    :rtype: Matrix
    '''

    D   = space.fiber_dim
    b   = space.spec.b_float
    out = np.zeros_like(A, dtype=np.complex128)

    for k in space.basis[1:]:

        c = b[sum(k)] * multinomial(k)
        if c == 0:
            continue

        src, dst, scale = space.shift_indices(k)

        # Flat coordinates of the (monomial, fiber) pairs
        f_src   = (src[:, None] * D + np.arange(D)).reshape(-1)
        f_dst   = (dst[:, None] * D + np.arange(D)).reshape(-1)
        f_scale = np.repeat(scale, D)

        out[np.ix_(f_dst, f_dst)] += c * np.outer(f_scale, f_scale) * A[np.ix_(f_src, f_src)]

    return out


def omitted_b_mass(space: TruncatedSpace) -> float:
    '''
    Mass Σ_{n > N} b_n of the representation coefficients beyond the truncation degree,
    from the known total mass of the tagged kernels; for untagged kernels only the
    available coefficients beyond N are summed.
    '''

    spec = space.spec
    b    = spec.b_float
    kept = float(np.sum(b[1:space.N + 1]))

    match spec.closed_form:
        case ClosedForm.Szego:     total = 1.
        case ClosedForm.Dirichlet: total = dirichlet_mass_limit(spec.alpha) if spec.alpha >= 0 else None
        case _:                    total = None

    if total is None:
        return float(np.sum(b[space.N + 1:]))

    return max(total - kept, 0.)

# --- CONSTRUCTION ---

@dataclass
class EigenClampReport:
    ''' Negative eigenvalues of S^2 set to zero by the construction. '''

    clamped        : int
    min_eigenvalue : float
    max_clamped    : float
    ''' Largest magnitude among the clamped eigenvalues, 0 if none. '''

    def to_json(self) -> Dict[str, Any]:
        return {'clamped': self.clamped, 'min_eigenvalue': self.min_eigenvalue, 'max_clamped': self.max_clamped}


@dataclass(eq=False)
class InnerMultiplier:
    '''
    Truncated inner multiplier of a subspace model: the positive operator S, an orthonormal
    basis of E = range(S) and the clamping report of the eigendecomposition.
    '''

    model        : SubspaceModel
    S            : Matrix
    E            : Matrix
    ''' Orthonormal basis of E as columns [dim x dim E]. '''
    clamp_report : EigenClampReport
    omitted_mass : float = 0.
    _W           : Matrix = field(init=False, repr=False)

    def __post_init__(self):

        # φ(λ)^* = W K(λ) with K(λ) the kernel block at λ
        self._W = self.E.conj().T @ self.S

    def __str__(self) -> str: return f'InnerMultiplier[{self.model.description}; dim E: {self.rank}]'
    def __repr__(self) -> str: return str(self)

    @property
    def space(self) -> TruncatedSpace: return self.model.space

    @property
    def rank(self) -> int: return self.E.shape[1]

    @property
    def W(self) -> Matrix: return self._W


def _range_basis(V: Matrix) -> Matrix:
    '''
    Deterministic orthonormal basis of the span of the columns of V: QR with column
    pivoting of the projector V V^*, then each column rotated so that its largest
    modulus entry is real and positive.
    '''

    r = V.shape[1]
    if r == 0:
        return np.zeros((V.shape[0], 0), dtype=np.complex128)

    Q, _, _ = qr(V @ V.conj().T, mode='economic', pivoting=True)
    Q = Q[:, :r]

    peaks  = Q[np.argmax(np.abs(Q), axis=0), np.arange(r)]
    return Q * (peaks.conj() / np.abs(peaks))[None, :]


def construct_inner(
    model     : SubspaceModel,
    clamp_tol : float = CLAMP_TOL,
    abort_tol : float = ABORT_TOL,
    range_tol : float = RANGE_TOL,
    logger    : Logger = SilentLogger()
) -> InnerMultiplier:
    '''
    Build S = (P_M - Q(P_M))^(1/2) on the truncated space. The compression of P_M - Q(P_M)
    is computed as (I - Q(I)) - C + Q(C), C being the compressed complement of the model.

    Negative eigenvalues in [-clamp_tol, 0) are clamped silently, those in [-abort_tol, -clamp_tol)
    are clamped with a warning and any lower one aborts the construction.

    :param model: Subspace model over a complete Nevanlinna-Pick kernel.
    :type model: SubspaceModel
    :raises ValueError: If the model is the zero subspace.
    :raises NumericalContractError: If the kernel is not Nevanlinna-Pick through the
        truncation degree or a significant negative eigenvalue appears.
    :return: The inner multiplier.
    :rtype: InnerMultiplier
    '''

    space = model.space

    if model.dim == 0:
        raise ValueError('The zero subspace has no inner multiplier')

    b = space.spec.b_float[1:space.N + 1]
    if np.any(b < -1e-12):
        n = int(np.argmax(b < -1e-12)) + 1
        raise NumericalContractError(f'Kernel {space.spec.name} is not Nevanlinna-Pick, b[{n}] < 0', value=float(b[n - 1]))

    I = np.eye(space.dim, dtype=np.complex128)
    C = model.complement

    X = hermitian_part((I - q_map(space, I)) - C + q_map(space, C))

    evals, evecs = eigh(X)
    min_eig      = float(evals[0])

    if min_eig < -abort_tol:
        raise NumericalContractError('Significant negative eigenvalue of P_M - Q(P_M)', value=min_eig)

    negative = evals < 0
    clamped  = int(np.sum(negative))
    report   = EigenClampReport(
        clamped=clamped,
        min_eigenvalue=min_eig,
        max_clamped=float(-evals[negative].min()) if clamped else 0.,
    )

    if min_eig < -clamp_tol:
        logger.warn(f'Clamping {clamped} negative eigenvalues down to {min_eig:.3e}, beyond the rounding level {clamp_tol:g}')

    # S and E share the range spanned by the eigenvalues above range_tol
    kept  = evals > range_tol
    evals = np.where(kept, evals, 0.)
    S     = hermitian_part((evecs[:, kept] * np.sqrt(evals[kept])[None, :]) @ evecs[:, kept].conj().T)
    E     = _range_basis(evecs[:, kept])

    omitted = omitted_b_mass(space)
    logger.info(f'Inner multiplier of {model.description}: dim E = {E.shape[1]}, {clamped} clamped eigenvalues, omitted b-mass {omitted:.3e}')

    return InnerMultiplier(model=model, S=S, E=E, clamp_report=report, omitted_mass=omitted)

# --- EVALUATION ---

def phi_matrix(inner: InnerMultiplier, lam: Any) -> Matrix:
    '''
    Value φ(λ): E -> D as a [fiber_dim x dim E] matrix in the basis of E.
    '''

    lam = as_point(lam, inner.space.d)
    return (inner.W @ kvec_block(inner.space, lam)).conj().T


def phi_batch(inner: InnerMultiplier, points: Points) -> NDArray[np.complex128]:
    ''' Values of φ over a batch of points [n_points x d] as [n_points x fiber_dim x dim E]. '''

    K = kvec_block(inner.space, np.atleast_2d(np.asarray(points, dtype=np.complex128)))
    return np.einsum('rb,pbd->pdr', inner.W, K).conj()


@dataclass
class ReproductionResidual:

    lhs       : complex
    rhs       : complex
    residual  : float
    tolerance : float


def projection_reproduction_check(
    inner : InnerMultiplier,
    lam   : Any,
    mu    : Any,
    x     : Any = None,
    y     : Any = None
) -> ReproductionResidual:
    '''
    Compare k_λ(μ) <φ(μ) φ(λ)^* x, y> with <P_M (k_λ x), k_μ y>, the matrix elements of ΦΦ^* = P_M
    on kernel functions. The tolerance is ten times the truncation tails of the two
    kernel functions relative to their norms, plus rounding.
    '''

    space = inner.space
    spec  = space.spec
    lam   = as_point(lam, space.d)
    mu    = as_point(mu,  space.d)
    e0    = np.eye(space.fiber_dim)[0]
    x     = e0 if x is None else np.asarray(x, dtype=np.complex128)
    y     = e0 if y is None else np.asarray(y, dtype=np.complex128)

    k_lm = kernel_eval(spec, lam, mu).value
    lhs  = k_lm * np.vdot(y, phi_matrix(inner, mu) @ phi_matrix(inner, lam).conj().T @ x)

    u_l = kvec_block(space, lam) @ x
    u_m = kvec_block(space, mu)  @ y
    rhs = np.vdot(u_m, (np.eye(space.dim) - inner.model.complement) @ u_l)

    K_l = kernel_eval(spec, lam, lam).value.real
    K_m = kernel_eval(spec, mu,  mu ).value.real
    tol = 10 * (kernel_tail(space, lam) + kernel_tail(space, mu)) * np.sqrt(K_l * K_m) + 1e-10

    return ReproductionResidual(lhs=complex(lhs), rhs=complex(rhs), residual=float(abs(lhs - rhs)), tolerance=float(tol))

# --- RANK ---

@dataclass
class RankProfile:
    '''
    Ranks of φ over sample points: m is the largest one, `submaximal` lists the indices of the
    points of lower rank (candidate zero-variety points) and `ambiguous` those with a singular
    value within a decade of the threshold.
    '''

    m          : int
    ranks      : List[int]
    submaximal : List[int]
    ambiguous  : List[int]


def rank_profile(inner: InnerMultiplier, points: Sequence[Any] | Points, svd_tol: float = SVD_TOL) -> RankProfile:
    ''' Rank of φ(λ) at every sample point, via singular values above `svd_tol`. '''

    pts = np.atleast_2d(np.asarray(points, dtype=np.complex128))

    if len(pts) == 0:
        raise ValueError('Rank profile needs at least one sample point')

    if inner.rank == 0:
        zeros = [0] * len(pts)
        return RankProfile(m=0, ranks=zeros, submaximal=[], ambiguous=[])

    sigmas = [svdvals(phi) for phi in phi_batch(inner, pts)]
    ranks  = [int(np.sum(s > svd_tol)) for s in sigmas]
    m      = max(ranks)

    return RankProfile(
        m=m,
        ranks=ranks,
        submaximal=[i for i, r in enumerate(ranks) if r < m],
        ambiguous=[i for i, s in enumerate(sigmas) if np.any((s > svd_tol / 10) & (s < svd_tol * 10))],
    )

# --- BOUNDARY ---

def support_degree(inner: InnerMultiplier, tol: float = SUPPORT_TOL) -> int:
    ''' Highest total degree of the coordinates touched by S. '''

    touched = np.flatnonzero(np.any(np.abs(inner.S) > tol, axis=0))
    return int(inner.space.flat_degrees[touched].max()) if len(touched) else 0


def scan_tail(inner: InnerMultiplier, lam: Any) -> float:
    '''
    Relative squared truncation tail of φ at λ.

    When S touches the truncation degree it is the relative kernel tail beyond N. Otherwise,
    with n the support degree of S, the coordinates above n reach φ(λ) only through the
    block of S acting on them, and the tail is ||S on the degrees above n||^2 times the
    relative kernel tail beyond n. Both assume S does not grow beyond the truncation degree.
    '''

    space = inner.space
    n     = support_degree(inner)

    if n >= space.N:
        return kernel_tail(space, lam)

    high = space.flat_degrees > n
    return float(np.linalg.norm(inner.S[:, high], 2)) ** 2 * kernel_tail(space, lam, N=n)


def boundary_isometry_scan(
    inner  : InnerMultiplier,
    z      : Any,
    t_grid : Grid,
    budget : float = TAIL_BUDGET,
    logger : Logger = SilentLogger()
) -> pd.DataFrame:
    '''
    Singular values of φ(t z) along the radius toward the boundary point z. For inner
    multipliers the top m singular values tend to one and the others to zero.

    :raises TruncationBudgetError: If some radius is beyond the truncation budget.
    :return: Table with columns t, sigma_1, ..., sigma_r, tail_bound with r = min(fiber_dim, dim E).
    :rtype: pd.DataFrame
    '''

    z = unit_direction(inner.space, z)
    n = min(inner.space.fiber_dim, inner.rank)

    rows = []
    for t in t_grid:

        tail = scan_tail(inner, t * z)
        if tail > budget:
            raise TruncationBudgetError(f'Radius t = {t} beyond the truncation budget {budget:g} at N = {inner.space.N}', value=tail)

        sigmas = svdvals(phi_matrix(inner, t * z)) if n else np.zeros(0)
        rows.append([float(t)] + [float(s) for s in sigmas[:n]] + [tail])

    columns = ['t'] + [f'sigma_{i+1}' for i in range(n)] + ['tail_bound']
    df = pd.DataFrame(rows, columns=columns)

    if n:
        logger.info(f'Boundary scan of {inner.model.description}: sigma_1 = {df["sigma_1"].iloc[-1]:.6g} at t = {df["t"].iloc[-1]:g}')

    return df
