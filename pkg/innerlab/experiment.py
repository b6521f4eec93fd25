'''
This file contains the experiments run by the innerlab command line, one per command.

Every experiment follows the same data flow in three steps: `init`, `run` and `finish`.
- `init` creates the output directory and logs the job configuration and the components.
- `run` computes the requested objects and renders every artifact as text in the message.
- `finish` writes the artifacts, named after the content hash of the configuration,
  together with the run manifest.

Outputs only depend on the configuration, so the same configuration and seed reproduce
byte-identical files. Log lines and timing never enter the artifacts.
'''

from __future__ import annotations

import time
from abc import ABC, abstractmethod
from importlib import metadata
from os import path
from typing import Any, Dict, List, Tuple, Type

import numpy as np
import pandas as pd
from rich.progress import Progress

from innerlab.curvature import (
    QuadratureConfig, default_sample_points, defect_trace, integrality_report, module_curvature_direct
)
from innerlab.innermt import (
    ABORT_TOL, CLAMP_TOL, RANGE_TOL, InnerMultiplier, boundary_isometry_scan, construct_inner,
    projection_reproduction_check, rank_profile, support_degree
)
from innerlab.kernelspace import (
    ClosedForm, KernelSpec, TruncatedSpace, build_space, extremal_one_point, kernel_product_chain, parse_generators,
    point_eval
)
from innerlab.series import (
    CoeffSeq, SeqMode, bn_mass, conjecture_evidence, dirichlet_mass_limit, hardy_check, np_certify,
    random_mass_one_sequence, ratio_tail, reciprocal_coeffs, to_float
)
from innerlab.subspace import (
    SubspaceModel, build_submodule, counterexample_closed_form, extremal_solution, point_zero_submodule,
    radial_scan, unit_direction
)
from innerlab.utils.errors import ConfigError
from innerlab.utils.io_ import csv_text, json_dumps, matrix_text, save_json, save_text
from innerlab.utils.logger import Logger, LoguruLogger, SilentLogger
from innerlab.utils.message import LabMessage
from innerlab.utils.misc import content_hash, lazydefault, stringfy_time
from innerlab.utils.parameters import JobConfig
from innerlab.utils.parsing import parse_grid, parse_point
from innerlab.utils.types import Grid, Point

PACKAGES = ('innerlab', 'numpy', 'scipy', 'pandas', 'mpmath', 'parglare')
''' Packages whose versions are echoed in the run manifest. '''

CONJECTURE_TOL = 1e-3
''' Gap |a_n / a_{n+1} - 1| above which a ratio tail is deemed not convergent to one. '''


def package_versions() -> Dict[str, str]:

    versions = {}
    for pkg in PACKAGES:
        try:
            versions[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            versions[pkg] = 'unknown'
    return versions

# --- CONFIGURATION HELPERS ---

# NOTE: The helpers translate the raw text fields of a configuration into domain
#       objects, reporting failures as `ConfigError` on the offending field.

def config_point(text: str, d: int, field: str) -> Point:
    ''' Parse a point of C^d from a configuration field. '''

    point = parse_point(text, field=field)
    if len(point) != d:
        raise ConfigError(field=field, msg=f'Expected {d} coordinates, got {len(point)}')
    return point


def config_grid(conf: JobConfig) -> Grid:
    '''
    Radius grid of the scans: the explicit `tgrid` when given, `tsteps`
    equispaced radii up to `tmax` otherwise.
    '''

    if conf.tgrid:
        grid = parse_grid(conf.tgrid)
    else:
        grid = np.linspace(conf.tmax / conf.tsteps, conf.tmax, conf.tsteps).tolist()

    if any(not 0 <= t < 1 for t in grid):
        raise ConfigError(field='tgrid', msg=f'Radii must lie in [0, 1), got {grid}')

    return grid


def config_kernel(conf: JobConfig) -> KernelSpec:
    ''' Kernel of the configuration with coefficients through `kernel_degree`. '''

    return KernelSpec.from_text(conf.spec, d=conf.d, N=conf.kernel_degree, exact=conf.exact)


def config_model(conf: JobConfig, space: TruncatedSpace, logger: Logger = SilentLogger()) -> SubspaceModel:
    '''
    Subspace model of the configuration: the point-zero subspace when `point_zero`
    is given, the subspace generated by `generators` otherwise.
    '''

    if conf.point_zero:
        return point_zero_submodule(space, config_point(conf.point_zero, conf.d, field='point_zero'), logger=logger)

    if not conf.generators:
        raise ConfigError(field='generators', msg='A subspace needs either generators or a point zero')

    gens = parse_generators(conf.generators, space)

    try:
        return build_submodule(space, gens, description=conf.generators, logger=logger)
    except ValueError as e:
        raise ConfigError(field='generators', msg=str(e)) from e


def quadrature(conf: JobConfig) -> QuadratureConfig:

    return QuadratureConfig(circle_points=conf.circle_points, samples=conf.samples, seed=conf.seed)

# --- EXPERIMENT ABSTRACT CLASS ---

class Experiment(ABC):
    '''
    Generic class implementing an experiment run by a command.

    It implements the generic data flow of `init`, `run` and `finish` steps and
    writes every artifact of the run in the logger directory as
    `<command>-<hash><suffix>`, with the hash computed on the configuration.

    The class can be instantiated in two modalities:
    - 1) By an explicit instantiation of a class with its domain objects.
    - 2) From a job configuration.
    '''

    EXPERIMENT_TITLE = 'Experiment'
    COMMAND          = ''

    # --- INIT ---

    def __init__(self, name: str = 'experiment', logger: Logger = SilentLogger()) -> None:
        '''
        Initialization of the experiment with a name and a logger.

        :param name: Name identifier for the run, defaults to 'experiment'.
        :type name: str, optional
        :param logger: Logger instance to log information, warnings and errors
            and to handle the output directory.
        :type logger: Logger
        '''

        self._name   = name
        self._logger = logger

    def _set_param_configuration(self, conf: JobConfig):
        '''
        Set the job configuration as experiment attribute.

        NOTE: The method is separated from the `__init__()` method
              to make the classmethod `from_config` the only one allowed to set it.
        '''

        self._conf: JobConfig = conf

    # --- CONFIGURATION ---

    @classmethod
    def from_config(cls, conf: JobConfig, logger: Logger | None = None) -> Experiment:
        '''
        Factory to instantiate an experiment from a validated job configuration.

        :param conf: Job configuration.
        :type conf: JobConfig
        :param logger: Logger of the run, defaults to a `LoguruLogger` on the output directory.
        :type logger: Logger | None, optional
        :return: Experiment instantiated with the configuration.
        :rtype: Experiment
        '''

        logger = lazydefault(logger, lambda: LoguruLogger(path=conf.out_dir, to_file=conf.log_file))

        experiment = cls._from_config(conf=conf, logger=logger)
        experiment._set_param_configuration(conf=conf)

        return experiment

    @classmethod
    @abstractmethod
    def _from_config(cls, conf: JobConfig, logger: Logger) -> Experiment:
        '''
        Method to build the domain objects of the experiment from a configuration.
        '''
        pass

    # --- STRING REPRESENTATION ---

    def __str__ (self) -> str: return f'{self.EXPERIMENT_TITLE}[{self._name}]'
    def __repr__(self) -> str: return str(self)

    # --- PROPERTIES ---

    @property
    def dir(self) -> str: return self._logger.dir
    ''' Output directory is the Logger one. '''

    @property
    def stem(self) -> str:
        ''' Common prefix of the output files, `<command>-<hash>`. '''

        digest = self._conf.hash if hasattr(self, '_conf') else content_hash({'command': self.COMMAND, 'name': self._name})
        return f'{self.COMMAND}-{digest}'

    @property
    def _components(self) -> List[Tuple[str, Any]]:
        ''' List of experiment components with their name, for logging purposes. '''

        return []

    # --- RUN ---

    def _init(self) -> LabMessage:
        '''
        The method is called before running the actual experiment.
        It creates the output directory, logs the configuration and
        the components and generates the initial message.
        '''

        self._logger.create_dir()

        self._logger.info(msg='')
        self._logger.info(msg=str(self))

        if hasattr(self, '_conf'):

            conf = self._conf.to_json()

            self._logger.info(msg='Parameters:')
            max_key_len = max(len(key) for key in conf) + 1  # for padding
            for k, v in conf.items():
                k_ = f'{k}:'
                self._logger.info(msg=f'{k_:<{max_key_len}}   {v}')
            self._logger.info(msg='')

        if self._components:

            self._logger.info(msg='Components:')
            max_key_len = max(len(key) for key, _ in self._components) + 1  # for padding
            for k, v in self._components:
                k_ = f'{k}:'
                self._logger.info(msg=f'{k_:<{max_key_len}}   {v}')
            self._logger.info(msg='')

        return LabMessage(start_time=time.time())

    @abstractmethod
    def _run(self, msg: LabMessage) -> LabMessage:
        ''' The method implements the core of the experiment, which is lead to subclasses. '''
        pass

    def _finish(self, msg: LabMessage) -> LabMessage:
        '''
        The method is called at the end of the actual experiment.
        It writes the artifacts and the manifest and logs the elapsed time.
        '''

        for suffix, text in sorted(msg.artifacts.items()):
            fp = path.join(self.dir, f'{self.stem}{suffix}')
            self._logger.info(msg=f'Saving {suffix} artifact to {fp}')
            save_text(text, path=fp)
            msg.written[suffix] = fp

        manifest = {
            'command'     : self.COMMAND,
            'hash'        : self.stem.split('-')[-1],
            'config'      : self._conf.outcome_json() if hasattr(self, '_conf') else {},
            'versions'    : package_versions(),
            'tolerances'  : msg.tolerances,
            'tail_bounds' : msg.tail_bounds,
            'summary'     : msg.summary,
            'artifacts'   : sorted(path.basename(fp) for fp in msg.written.values()),
        }

        fp = path.join(self.dir, f'{self.stem}.manifest.json')
        save_json(manifest, path=fp)
        msg.written['.manifest.json'] = fp

        msg.end_time = time.time()

        str_time = stringfy_time(sec=msg.elapsed_time)
        self._logger.info(msg=f'Experiment finished successfully. Elapsed time: {str_time}.')
        self._logger.info(msg='')

        return msg

    def run(self) -> LabMessage:
        '''
        The method implements the experiment logic by combining
        `_init()`, `_run()` and `_finish()` methods.

        :return: Message produced by the experiment
        :rtype: LabMessage
        '''

        try:
            msg = self._init()
            msg = self._run(msg)
            msg = self._finish(msg)
        finally:
            self._logger.close()

        return msg

# --- SERIES ---

class SeriesExperiment(Experiment):
    ''' Kernel coefficients {a_n}, representation coefficients {b_n} and ratio tail of a kernel. '''

    EXPERIMENT_TITLE = 'Series'
    COMMAND          = 'series'

    def __init__(self, spec: KernelSpec, degree: int, name: str = 'series', logger: Logger = SilentLogger()) -> None:

        super().__init__(name=name, logger=logger)

        self._spec   = spec
        self._degree = degree

    @classmethod
    def _from_config(cls, conf: JobConfig, logger: Logger) -> SeriesExperiment:

        return cls(spec=config_kernel(conf), degree=conf.degree, name=conf.name, logger=logger)

    @property
    def _components(self) -> List[Tuple[str, Any]]: return [('Kernel', self._spec)]

    def _run(self, msg: LabMessage) -> LabMessage:

        a = self._spec.a.truncate(self._degree)
        b = reciprocal_coeffs(a)

        ratios = [to_float(r) for r in ratio_tail(a)]

        try:
            mass = to_float(bn_mass(b))
        except ValueError:
            # Negative b_n, the kernel is not Nevanlinna-Pick
            mass = None

        msg.artifacts['.a.csv']     = a.to_csv_text()
        msg.artifacts['.b.csv']     = b.to_csv_text()
        msg.artifacts['.ratio.csv'] = csv_text(pd.DataFrame({'n': range(len(ratios)), 'ratio': ratios}))

        msg.summary = {
            'spec'       : self._spec.name,
            'mode'       : str(a.mode),
            'degree'     : self._degree,
            'b_mass'     : mass,
            'last_ratio' : ratios[-1] if ratios else None,
        }

        self._logger.info(f'Partial mass of b through degree {self._degree}: {mass}')

        return msg

# --- NP CERTIFICATION ---

class NPCheckExperiment(Experiment):
    ''' Nevanlinna-Pick certificate of a kernel by the reciprocal signs and by the ratio criterion. '''

    EXPERIMENT_TITLE = 'NPCheck'
    COMMAND          = 'npcheck'

    def __init__(
        self,
        spec   : KernelSpec,
        degree : int,
        tol    : float,
        name   : str = 'npcheck',
        logger : Logger = SilentLogger()
    ) -> None:

        super().__init__(name=name, logger=logger)

        self._spec   = spec
        self._degree = degree
        self._tol    = tol

    @classmethod
    def _from_config(cls, conf: JobConfig, logger: Logger) -> NPCheckExperiment:

        return cls(spec=config_kernel(conf), degree=conf.degree, tol=conf.tol, name=conf.name, logger=logger)

    @property
    def _components(self) -> List[Tuple[str, Any]]: return [('Kernel', self._spec)]

    def _run(self, msg: LabMessage) -> LabMessage:

        certificate = np_certify(self._spec.a, N=self._degree, tol=self._tol, logger=self._logger)
        hardy       = hardy_check(self._spec.a.truncate(self._degree), tol=self._tol)

        msg.artifacts['.json'] = json_dumps({
            'spec'        : self._spec.name,
            'certificate' : certificate.to_json(),
            'hardy'       : hardy.to_json(),
        })
        msg.artifacts['.b.csv'] = certificate.b.to_csv_text()

        msg.tolerances = {'sign_tolerance': self._tol} if not certificate.b.exact else {}
        msg.summary    = {'status': str(certificate.status), 'hardy': str(hardy.status)}

        return msg

# --- EXTREMAL FUNCTIONS ---

class ExtremalExperiment(Experiment):
    '''
    One point extremal function of a kernel at a point with the chain of bounds
    at that point and, when a subspace is configured, the extremal function of the subspace.
    '''

    EXPERIMENT_TITLE = 'Extremal'
    COMMAND          = 'extremal'

    def __init__(
        self,
        spec   : KernelSpec,
        N      : int,
        point  : Point,
        model  : SubspaceModel | None = None,
        name   : str = 'extremal',
        logger : Logger = SilentLogger()
    ) -> None:

        super().__init__(name=name, logger=logger)

        self._spec  = spec
        self._N     = N
        self._point = point
        self._model = model

    @classmethod
    def _from_config(cls, conf: JobConfig, logger: Logger) -> ExtremalExperiment:

        if not conf.point:
            raise ConfigError(field='point', msg='The extremal command needs a point')

        spec  = config_kernel(conf)
        point = config_point(conf.point, conf.d, field='point')
        model = None

        if conf.generators or conf.point_zero:
            model = config_model(conf, build_space(spec, conf.N, conf.fiber_dim), logger=logger)

        return cls(spec=spec, N=conf.N, point=point, model=model, name=conf.name, logger=logger)

    @property
    def _components(self) -> List[Tuple[str, Any]]:

        components = [('Kernel', self._spec), ('Point', self._point)]
        if self._model is not None:
            components.append(('Subspace', self._model))
        return components

    @staticmethod
    def _coefficients(space: TruncatedSpace, coeffs: np.ndarray) -> str:

        return csv_text(pd.DataFrame({
            'monomial' : space.labels(),
            're'       : coeffs.reshape(-1).real,
            'im'       : coeffs.reshape(-1).imag,
        }))

    def _run(self, msg: LabMessage) -> LabMessage:

        phi = extremal_one_point(self._spec, self._point, self._N)
        first, second, third = kernel_product_chain(self._spec, phi, self._point, self._N)

        msg.artifacts['.csv'] = self._coefficients(phi.space, phi.coeffs)

        msg.summary = {
            'norm'        : phi.norm(),
            'value_at_0'  : float(point_eval(phi, np.zeros(self._spec.d))[0].real),
            'value_at_pt' : float(abs(point_eval(phi, self._point)[0])),
            'bounds'      : [first, second, third],
        }

        if self._model is not None:
            solution = extremal_solution(self._model)
            msg.artifacts['.solution.csv'] = self._coefficients(solution.space, solution.coeffs)
            msg.summary['solution_at_0'] = float(point_eval(solution, np.zeros(self._spec.d))[0].real)

        self._logger.info(f'Extremal function at {self._point}: value at 0 {msg.summary["value_at_0"]:.12g}')

        return msg

# --- RATIO SCAN ---

class RatioScanExperiment(Experiment):
    '''
    Radial scan of the ratio ||P_M k_λ||^2 / ||k_λ||^2 toward a boundary point. For point-zero
    subspaces of the disc kernels (n+1)^(-alpha) with alpha > 1 the closed form is scanned along.
    '''

    EXPERIMENT_TITLE = 'RatioScan'
    COMMAND          = 'ratio-scan'

    def __init__(
        self,
        model     : SubspaceModel,
        direction : Point,
        t_grid    : Grid,
        budget    : float,
        name      : str = 'ratio-scan',
        logger    : Logger = SilentLogger()
    ) -> None:

        super().__init__(name=name, logger=logger)

        self._model     = model
        self._direction = unit_direction(model.space, direction)
        self._t_grid    = t_grid
        self._budget    = budget

    @classmethod
    def _from_config(cls, conf: JobConfig, logger: Logger) -> RatioScanExperiment:

        space = build_space(config_kernel(conf), conf.N, conf.fiber_dim)

        try:
            direction = unit_direction(space, config_point(conf.direction, conf.d, field='direction'))
        except ValueError as e:
            raise ConfigError(field='direction', msg=str(e)) from e

        return cls(
            model=config_model(conf, space, logger=logger),
            direction=direction,
            t_grid=config_grid(conf),
            budget=conf.budget,
            name=conf.name,
            logger=logger,
        )

    @property
    def _components(self) -> List[Tuple[str, Any]]:
        return [('Subspace', self._model), ('Direction', self._direction)]

    @property
    def _closed_form(self) -> bool:
        ''' Whether the point-zero closed form applies to the model. '''

        spec = self._model.space.spec
        return (
            self._model.z0 is not None and spec.d == 1 and self._model.space.fiber_dim == 1
            and spec.closed_form == ClosedForm.Dirichlet and spec.alpha > 1
        )

    def _run(self, msg: LabMessage) -> LabMessage:

        df = radial_scan(self._model, self._direction, self._t_grid, budget=self._budget, logger=self._logger)

        msg.summary = {
            'model'      : self._model.to_json(),
            'last_ratio' : float(df['ratio'].iloc[-1]),
            'max_ratio'  : float(df['ratio'].max()),
        }

        if self._closed_form:

            alpha, z0, w = self._model.space.spec.alpha, self._model.z0[0], self._direction[0]

            df['closed_form'] = [counterexample_closed_form(alpha, z0, t * w).value for t in df['t']]

            boundary = counterexample_closed_form(alpha, z0, w)
            msg.summary['boundary_value'] = {'value': boundary.value, 'lower': boundary.lower, 'upper': boundary.upper}

            self._logger.info(f'Boundary value of the closed form at w = {w:g}: {boundary.value:.12g}')

        msg.artifacts['.csv'] = csv_text(df)
        msg.tolerances        = {'budget': self._budget}
        msg.tail_bounds       = {'max_kernel_tail': float(df['tail_bound'].max())}

        return msg

# --- INNER MULTIPLIER ---

class InnerExperiment(Experiment):
    '''
    Inner multiplier of a subspace: the operator S, the basis of E, the rank profile,
    the reproduction residuals and optionally the boundary scan of the singular values.
    '''

    EXPERIMENT_TITLE = 'Inner'
    COMMAND          = 'inner'

    def __init__(
        self,
        model          : SubspaceModel,
        t_grid         : Grid,
        budget         : float,
        svd_tol        : float,
        seed           : int = 0,
        scan_direction : Point | None = None,
        name           : str = 'inner',
        logger         : Logger = SilentLogger()
    ) -> None:

        super().__init__(name=name, logger=logger)

        self._model          = model
        self._t_grid         = t_grid
        self._budget         = budget
        self._svd_tol        = svd_tol
        self._seed           = seed
        self._scan_direction = scan_direction

    @classmethod
    def _from_config(cls, conf: JobConfig, logger: Logger) -> InnerExperiment:

        space = build_space(config_kernel(conf), conf.N, conf.fiber_dim)
        scan  = config_point(conf.scan_direction, conf.d, field='scan_direction') if conf.scan_direction else None

        return cls(
            model=config_model(conf, space, logger=logger),
            t_grid=config_grid(conf),
            budget=conf.budget,
            svd_tol=conf.svd_tol,
            seed=conf.seed,
            scan_direction=scan,
            name=conf.name,
            logger=logger,
        )

    @property
    def _components(self) -> List[Tuple[str, Any]]: return [('Subspace', self._model)]

    def _reproduction(self, inner: InnerMultiplier, points: np.ndarray) -> Dict[str, float]:
        ''' Largest reproduction residual over consecutive pairs of sample points. '''

        checks = [projection_reproduction_check(inner, lam, mu) for lam, mu in zip(points[0::2], points[1::2])]

        return {
            'max_residual'  : max(c.residual  for c in checks),
            'max_tolerance' : max(c.tolerance for c in checks),
            'passed'        : all(c.residual <= c.tolerance for c in checks),
        }

    def _run(self, msg: LabMessage) -> LabMessage:

        space = self._model.space
        inner = construct_inner(self._model, logger=self._logger)

        # Interior points away from the boundary, where the truncation is accurate
        points  = default_sample_points(space.d, seed=self._seed, rmax=0.6)
        profile = rank_profile(inner, points, svd_tol=self._svd_tol)

        msg.artifacts['.S.txt'] = matrix_text(inner.S, space.labels())
        msg.artifacts['.E.txt'] = matrix_text(inner.E, space.labels())

        msg.summary = {
            'model'          : self._model.to_json(),
            'dim_E'          : inner.rank,
            'support_degree' : support_degree(inner),
            'clamp'          : inner.clamp_report.to_json(),
            'rank'           : {'m': profile.m, 'submaximal': profile.submaximal, 'ambiguous': profile.ambiguous},
            'reproduction'   : self._reproduction(inner, points) if inner.rank else None,
        }

        msg.tolerances  = {'clamp_tol': CLAMP_TOL, 'abort_tol': ABORT_TOL, 'range_tol': RANGE_TOL, 'svd_tol': self._svd_tol}
        msg.tail_bounds = {'omitted_b_mass': inner.omitted_mass}

        if self._scan_direction is not None:

            df = boundary_isometry_scan(inner, self._scan_direction, self._t_grid, budget=self._budget, logger=self._logger)

            msg.artifacts['.scan.csv']      = csv_text(df)
            msg.tolerances['budget']        = self._budget
            msg.tail_bounds['max_scan_tail'] = float(df['tail_bound'].max())

        return msg

# --- CURVATURE ---

class CurvatureExperiment(Experiment):
    '''
    Curvature family of the quotient by a subspace against the integer given by the rank formula.
    Quotients of the Szegő space are cross-checked with the defect operator route.
    '''

    EXPERIMENT_TITLE = 'Curvature'
    COMMAND          = 'curvature'

    DIRECT_POINTS = 8

    def __init__(
        self,
        model   : SubspaceModel,
        t_grid  : Grid,
        quad    : QuadratureConfig,
        budget  : float,
        svd_tol : float,
        name    : str = 'curvature',
        logger  : Logger = SilentLogger()
    ) -> None:

        super().__init__(name=name, logger=logger)

        self._model   = model
        self._t_grid  = t_grid
        self._quad    = quad
        self._budget  = budget
        self._svd_tol = svd_tol

    @classmethod
    def _from_config(cls, conf: JobConfig, logger: Logger) -> CurvatureExperiment:

        space = build_space(config_kernel(conf), conf.N, conf.fiber_dim)

        return cls(
            model=config_model(conf, space, logger=logger),
            t_grid=config_grid(conf),
            quad=quadrature(conf),
            budget=conf.budget,
            svd_tol=conf.svd_tol,
            name=conf.name,
            logger=logger,
        )

    @property
    def _components(self) -> List[Tuple[str, Any]]:
        return [('Subspace', self._model), ('Quadrature', self._quad.describe(self._model.space.d))]

    def _direct_residual(self, inner: InnerMultiplier) -> float:
        ''' Largest gap between trace F(λ) from the defect operator and the defect trace of φ. '''

        points = default_sample_points(self._model.space.d, n=self.DIRECT_POINTS, seed=self._quad.seed, rmax=0.8)

        return max(
            abs(float(np.trace(module_curvature_direct(self._model, p)).real) - defect_trace(inner, p))
            for p in points
        )

    def _run(self, msg: LabMessage) -> LabMessage:

        space = self._model.space
        inner = construct_inner(self._model, logger=self._logger)

        report = integrality_report(
            inner, self._t_grid, quad=self._quad,
            sample_points=default_sample_points(space.d, seed=self._quad.seed),
            svd_tol=self._svd_tol, budget=self._budget, logger=self._logger
        )

        msg.artifacts['.csv'] = csv_text(pd.DataFrame({
            't'        : report.t_grid,
            'estimate' : report.estimates,
            'mc_error' : report.mc_error,
        }))
        msg.artifacts['.json'] = json_dumps(report.to_json())

        msg.summary = {'candidate': report.candidate, 'residual': report.residual, 'applicable': report.applicable}

        if space.spec.closed_form == ClosedForm.Szego:
            msg.summary['direct_residual'] = self._direct_residual(inner)

        msg.tolerances  = {'svd_tol': self._svd_tol, 'budget': self._budget, 'clamp_tol': CLAMP_TOL, 'abort_tol': ABORT_TOL}
        msg.tail_bounds = {'omitted_b_mass': inner.omitted_mass}

        return msg

# --- CONJECTURE ---

class ConjectureExperiment(Experiment):
    '''
    Evidence harness for "Σ b_n = 1 implies a_n / a_{n+1} -> 1": random exact mass-one
    sequences plus the representation sequence of the configured kernel.
    '''

    EXPERIMENT_TITLE = 'Conjecture'
    COMMAND          = 'conjecture45'

    def __init__(
        self,
        spec    : KernelSpec,
        degree  : int,
        count   : int,
        support : int,
        seed    : int = 0,
        tol     : float = CONJECTURE_TOL,
        name    : str = 'conjecture45',
        logger  : Logger = SilentLogger()
    ) -> None:

        super().__init__(name=name, logger=logger)

        self._spec    = spec
        self._degree  = degree
        self._count   = count
        self._support = support
        self._seed    = seed
        self._tol     = tol

    @classmethod
    def _from_config(cls, conf: JobConfig, logger: Logger) -> ConjectureExperiment:

        return cls(
            spec=config_kernel(conf),
            degree=conf.degree,
            count=conf.count,
            support=conf.support,
            seed=conf.seed,
            name=conf.name,
            logger=logger,
        )

    @property
    def _components(self) -> List[Tuple[str, Any]]: return [('Kernel', self._spec)]

    @property
    def _mass_limit(self) -> float | None:
        ''' Total b-mass of the tagged kernels. '''

        match self._spec.closed_form:
            case ClosedForm.Szego:     return 1.
            case ClosedForm.Dirichlet: return dirichlet_mass_limit(self._spec.alpha)
            case _:                    return None

    def _run(self, msg: LabMessage) -> LabMessage:

        rng  = np.random.default_rng(self._seed)
        rows = []

        self._logger.set_progress_bar()

        with Progress(console=Logger.CONSOLE) as progress:

            for i in progress.track(range(self._count), total=self._count):

                b  = random_mass_one_sequence(rng, self._support)
                ev = conjecture_evidence(b, self._degree, tol=self._tol)
                rows.append({'sample': i, **ev.to_json()})

        df = pd.DataFrame(rows, columns=[
            'sample', 'support', 'mass', 'hypothesis', 'tail_estimate', 'gap', 'counterexample_candidate'
        ])

        b_spec  = CoeffSeq(coeffs=tuple(self._spec.b_float[:self._degree + 1]), mode=SeqMode.Float)
        ev_spec = conjecture_evidence(b_spec, self._degree, tol=self._tol, mass_limit=self._mass_limit)

        msg.artifacts['.csv'] = csv_text(df)

        msg.summary = {
            'spec'       : {'name': self._spec.name, **ev_spec.to_json()},
            'samples'    : self._count,
            'max_gap'    : float(df['gap'].max()),
            'candidates' : int(df['counterexample_candidate'].sum()),
        }
        msg.tolerances = {'ratio_gap': self._tol}

        if not ev_spec.hypothesis:
            self._logger.info(f'Kernel {self._spec.name} is outside the hypothesis: b-mass {ev_spec.mass:.12g}')

        return msg

# --- REGISTRY ---

EXPERIMENTS: Dict[str, Type[Experiment]] = {
    exp.COMMAND: exp for exp in (
        SeriesExperiment,
        NPCheckExperiment,
        ExtremalExperiment,
        RatioScanExperiment,
        InnerExperiment,
        CurvatureExperiment,
        ConjectureExperiment,
    )
}
''' Experiment class of every command. '''
