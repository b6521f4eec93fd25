'''
This module implements the curvature invariant of the quotient modules H = H(k, D) ⊖ M

    K(H) = ∫_{∂B_d} trace F(z) dσ(z),        trace F(λ) = trace(1_D - φ(λ) φ(λ)^*)

where φ is the inner multiplier of M. The invariant is estimated as a family in the radius t,
never extrapolated: on the circle (d = 1) with the trapezoid rule, on the sphere (d >= 2) with
seeded Monte Carlo sampling. Its integer value is identified independently through the rank
formula K(H) = dim D - sup rank φ(λ).

The direct route through the defect operator of the compressed coordinate multipliers,
`module_curvature_direct`, is kept as a cross-check oracle.
'''

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import LinAlgError, eigh, null_space, solve

from innerlab.innermt import SVD_TOL, InnerMultiplier, phi_batch, phi_matrix, rank_profile, scan_tail
from innerlab.kernelspace import ClosedForm, KernelSpec, PolyFn, sample_sphere
from innerlab.series import dirichlet_mass_limit
from innerlab.subspace import TAIL_BUDGET, SubspaceModel, annihilates_quotient, evaluation_dimension
from innerlab.utils.errors import NumericalContractError, TruncationBudgetError
from innerlab.utils.logger import Logger, SilentLogger
from innerlab.utils.misc import as_point, hermitian_part
from innerlab.utils.types import Grid, Matrix, Points

# --- QUADRATURE ---

@dataclass(frozen=True)
class QuadratureConfig:
    '''
    Quadrature of the boundary integral: trapezoid rule on `circle_points` equispaced
    nodes for d = 1, Monte Carlo with `samples` uniform points drawn from a generator
    seeded with `seed` for d >= 2.
    '''

    circle_points : int = 2048
    samples       : int = 20000
    seed          : int = 0

    def describe(self, d: int) -> str:

        if d == 1:
            return f'circle-trapezoid({self.circle_points})'
        return f'sphere-montecarlo({self.samples}, seed={self.seed})'


@dataclass
class CurvatureEstimate:
    ''' Estimate of the curvature integral at radius t. '''

    value             : float
    t                 : float
    quadrature        : str
    statistical_error : float = 0.
    tail_bound        : float = 0.

    @property
    def nearest_integer(self) -> int: return int(round(self.value))

    @property
    def gap(self) -> float: return abs(self.value - self.nearest_integer)

    def to_json(self) -> Dict[str, Any]:

        return {
            't'                 : self.t,
            'value'             : self.value,
            'nearest_integer'   : self.nearest_integer,
            'gap'               : self.gap,
            'quadrature'        : self.quadrature,
            'statistical_error' : self.statistical_error,
            'tail_bound'        : self.tail_bound,
        }


def defect_trace(inner: InnerMultiplier, lam: Any) -> float:
    ''' trace(1_D - φ(λ) φ(λ)^*), in [0, dim D]. '''

    phi = phi_matrix(inner, lam)
    return float(inner.space.fiber_dim - np.sum(np.abs(phi) ** 2))


def _defect_traces(inner: InnerMultiplier, points: Points) -> NDArray[np.float64]:

    if inner.rank == 0:
        return np.full(len(points), float(inner.space.fiber_dim))

    phis = phi_batch(inner, points)
    return inner.space.fiber_dim - np.sum(np.abs(phis) ** 2, axis=(1, 2))


def curvature_estimate(
    inner  : InnerMultiplier,
    t      : float,
    quad   : QuadratureConfig = QuadratureConfig(),
    budget : float = TAIL_BUDGET
) -> CurvatureEstimate:
    '''
    Mean of trace F over the sphere of radius t.

    :param inner: Inner multiplier of the submodule.
    :type inner: InnerMultiplier
    :param t: Radius in [0, 1).
    :type t: float
    :param quad: Quadrature configuration.
    :type quad: QuadratureConfig, optional
    :param budget: Largest accepted truncation tail, defaults to 1e-8.
    :type budget: float, optional
    :raises TruncationBudgetError: If t is beyond the truncation budget.
    :return: The estimate at radius t.
    :rtype: CurvatureEstimate
    '''

    space = inner.space
    d     = space.d

    if not 0 <= t < 1:
        raise ValueError(f'Radius must lie in [0, 1), got t = {t}')

    # The kernel is U-invariant: the tail depends on |λ| only
    tail = scan_tail(inner, np.eye(d)[0] * t)
    if tail > budget:
        raise TruncationBudgetError(f'Radius t = {t} beyond the truncation budget {budget:g} at N = {space.N}', value=tail)

    if d == 1:

        angles = 2 * np.pi * np.arange(quad.circle_points) / quad.circle_points
        points = (t * np.exp(1j * angles))[:, None]
        values = _defect_traces(inner, points)

        # numpy sums with pairwise summation in a fixed order
        return CurvatureEstimate(value=float(values.mean()), t=t, quadrature=quad.describe(d), tail_bound=tail)

    rng    = np.random.default_rng(quad.seed)
    points = t * sample_sphere(d, quad.samples, rng)
    values = _defect_traces(inner, points)

    return CurvatureEstimate(
        value=float(values.mean()),
        t=t,
        quadrature=quad.describe(d),
        statistical_error=float(values.std(ddof=1) / np.sqrt(quad.samples)),
        tail_bound=tail,
    )

# --- INTEGRALITY ---

@dataclass
class HypothesisCheck:
    '''
    Whether the kernel satisfies a_n / a_{n+1} -> 1 and k_λ(λ) -> ∞ at the boundary,
    the hypotheses under which the curvature is an integer given by the rank formula.
    '''

    applicable  : bool
    ratio_limit : float
    mass        : float
    reason      : str


def theorem_hypotheses(spec: KernelSpec, tol: float = 1e-3) -> HypothesisCheck:
    '''
    Check the integrality hypotheses on a kernel. Tagged kernels are decided from their
    closed forms; for the others the last coefficient ratio and the partial b-mass
    must both be within `tol` of one.
    '''

    match spec.closed_form:

        case ClosedForm.Szego:
            return HypothesisCheck(applicable=True, ratio_limit=1., mass=1., reason='szego kernel')

        case ClosedForm.Dirichlet:
            mass = dirichlet_mass_limit(spec.alpha)
            if spec.alpha > 1:
                return HypothesisCheck(applicable=False, ratio_limit=1., mass=mass, reason=f'bounded kernel, alpha = {spec.alpha} > 1')
            return HypothesisCheck(applicable=True, ratio_limit=1., mass=mass, reason=f'unbounded kernel, alpha = {spec.alpha} <= 1')

    a     = spec.a_float
    limit = float(a[-2] / a[-1]) if spec.degree else float('nan')
    mass  = float(np.sum(spec.b_float[1:]))
    ok    = abs(limit - 1) <= tol and abs(mass - 1) <= tol

    return HypothesisCheck(
        applicable=ok, ratio_limit=limit, mass=mass,
        reason=f'partial evidence through degree {spec.degree}: ratio {limit:.6g}, b-mass {mass:.6g}'
    )


@dataclass
class IntegralityReport:
    ''' Curvature family along a radius grid against the rank formula candidate. '''

    model        : str
    t_grid       : List[float]
    estimates    : List[float]
    mc_error     : List[float]
    m            : int
    evaluation_m : int
    candidate    : int
    residual     : float
    applicable   : bool
    reason       : str
    quadrature   : str
    annihilated  : bool | None = None
    ambiguous    : List[int] = field(default_factory=list)

    def to_json(self) -> Dict[str, Any]:

        return {
            'model'        : self.model,
            'tGrid'        : self.t_grid,
            'estimates'    : self.estimates,
            'mcError'      : self.mc_error,
            'm'            : self.m,
            'evaluation_m' : self.evaluation_m,
            'candidate'    : self.candidate,
            'residual'     : self.residual,
            'applicable'   : self.applicable,
            'reason'       : self.reason,
            'quadrature'   : self.quadrature,
            'annihilated'  : self.annihilated,
            'ambiguous'    : self.ambiguous,
        }


def default_sample_points(d: int, n: int = 32, seed: int = 0, rmax: float = 0.9) -> Points:
    ''' Seeded interior sample points with radii uniform in [0.1, rmax]. '''

    rng   = np.random.default_rng(seed)
    radii = rng.uniform(0.1, rmax, size=n)
    return sample_sphere(d, n, rng) * radii[:, None]


def integrality_report(
    inner         : InnerMultiplier,
    t_grid        : Grid,
    quad          : QuadratureConfig = QuadratureConfig(),
    sample_points : Points | None = None,
    annihilator   : PolyFn | None = None,
    svd_tol       : float = SVD_TOL,
    budget        : float = TAIL_BUDGET,
    logger        : Logger = SilentLogger()
) -> IntegralityReport:
    '''
    Estimate the curvature along a radius grid and compare its last value with the
    integer candidate dim D - m, m being the largest rank of φ over the sample points.
    The report is marked non-applicable when the kernel fails the integrality hypotheses.
    When a scalar annihilating multiplier is given and kills the quotient, the candidate is 0.

    :param inner: Inner multiplier of the submodule.
    :type inner: InnerMultiplier
    :param t_grid: Radii of the curvature family.
    :type t_grid: Grid
    :param quad: Quadrature configuration.
    :type quad: QuadratureConfig, optional
    :param sample_points: Interior points of the rank profile, defaults to 32 seeded points.
    :type sample_points: Points | None, optional
    :param annihilator: Candidate scalar multiplier annihilating the quotient.
    :type annihilator: PolyFn | None, optional
    :return: The report.
    :rtype: IntegralityReport
    '''

    space = inner.space
    model = inner.model

    points = default_sample_points(space.d, seed=quad.seed) if sample_points is None else np.atleast_2d(sample_points)

    hyp     = theorem_hypotheses(space.spec)
    profile = rank_profile(inner, points, svd_tol=svd_tol)
    eval_m  = max(evaluation_dimension(model, p, tol=svd_tol) for p in points)

    annihilated = None if annihilator is None else annihilates_quotient(model, annihilator)

    estimates = [curvature_estimate(inner, t, quad=quad, budget=budget) for t in t_grid]

    candidate = space.fiber_dim - profile.m
    if annihilated:
        candidate = 0

    residual = abs(estimates[-1].value - candidate)

    if not hyp.applicable:
        logger.warn(f'Integrality hypotheses fail for {space.spec.name}: {hyp.reason}')

    if profile.ambiguous:
        logger.warn(f'{len(profile.ambiguous)} sample points with singular values at the rank threshold {svd_tol:g}')

    logger.info(f'Curvature of {model.description}: estimate {estimates[-1].value:.6g} at t = {t_grid[-1]:g}, candidate {candidate}, residual {residual:.3e}')

    return IntegralityReport(
        model=model.description,
        t_grid=[float(t) for t in t_grid],
        estimates=[e.value for e in estimates],
        mc_error=[e.statistical_error for e in estimates],
        m=profile.m,
        evaluation_m=eval_m,
        candidate=candidate,
        residual=float(residual),
        applicable=hyp.applicable,
        reason=hyp.reason,
        quadrature=quad.describe(space.d),
        annihilated=annihilated,
        ambiguous=profile.ambiguous,
    )

# --- DIRECT ROUTE ---

def module_curvature_direct(model: SubspaceModel, lam: Any, range_tol: float = 1e-10) -> Matrix:
    '''
    Curvature operator F(λ) = (1 - |λ|^2) Δ (1 - T(λ)^*)^{-1} (1 - T(λ))^{-1} Δ of the quotient
    H = H_d^2(D) ⊖ M, with T_i the compressions of the coordinate multipliers to H, T(λ) = Σ conj(λ_i) T_i
    and Δ = (1 - Σ T_i T_i^*)^(1/2). It is returned restricted to the range of Δ.

    :param model: Subspace model over the Szegő kernel.
    :type model: SubspaceModel
    :param lam: Interior point.
    :raises ValueError: If the kernel is not the Szegő one.
    :raises NumericalContractError: If 1 - T(λ) is singular.
    :return: F(λ) on the range of Δ.
    :rtype: Matrix
    '''

    space = model.space

    if space.spec.closed_form != ClosedForm.Szego:
        raise ValueError(f'The direct curvature is defined for quotients of the Szegő space, got {space.spec.name}')

    lam = as_point(lam, space.d)

    H = null_space(model.basis.conj().T) if model.dim else np.eye(space.dim)
    h = H.shape[1]

    if h == 0:
        return np.zeros((0, 0), dtype=np.complex128)

    T = [H.conj().T @ space.shift_matrix(i) @ H for i in range(space.d)]

    evals, evecs = eigh(hermitian_part(np.eye(h) - sum(Ti @ Ti.conj().T for Ti in T)))
    evals = np.clip(evals, 0, None)
    delta = (evecs * np.sqrt(evals)[None, :]) @ evecs.conj().T

    A = np.eye(h) - sum(np.conj(l) * Ti for l, Ti in zip(lam, T))

    try:
        Y = solve(A, delta)
    except LinAlgError as e:
        raise NumericalContractError(f'Singular 1 - T(λ) at λ = {lam}') from e

    F = (1 - np.vdot(lam, lam).real) * (Y.conj().T @ Y)

    R = evecs[:, evals > range_tol]
    return hermitian_part(R.conj().T @ F @ R)
