'''
This module contains the main classes implementing the argument parameters for the command line interface.
Every job parameter is declared once as an `ArgParam` in the `ArgParams` enumeration;
the command line parser and the job-file validation are both derived from it.
'''

from __future__ import annotations

import argparse
from argparse import ArgumentParser
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Type

from innerlab.utils.errors import ConfigError
from innerlab.utils.misc import content_hash, overwrite_dict

Parameter      = str | int | float | bool
''' Possible command line argument types. '''

ParameterType  = Type[Parameter]
''' Type of the parameter. '''

ParamConfig  = Dict['ArgParam', Parameter]
''' Configuration with different possibles argument parameters. '''

@dataclass
class ArgParam:
    ''' Class to represent an argument parameter. '''

    name    : str
    ''' Name of the argument, also the key in JSON job files. '''

    help    : str
    ''' Description of the argument. '''

    type    : ParameterType
    ''' Type of the argument. '''

    default : Any = None
    '''
    Default value of the argument.
    None means that the argument has no default value.
    '''

    @property
    def flags(self) -> List[str]:
        '''
        Command line flags of the parameter: the underscore name and,
        for compound names, the dashed alias (e.g. `--point_zero`, `--point-zero`).
        '''

        flags = [f'--{self.name}']
        if '_' in self.name:
            flags.append(f'--{self.name.replace("_", "-")}')
        return flags

    # NOTE: The following methods are used to make the class hashable and a valid key in a dictionary
    def __hash__(self)        -> int:  return hash(self.name)
    def __eq__  (self, other) -> bool: return self.name == other.name if isinstance(other, ArgParam) else False

    @staticmethod
    def argconf_to_json(argconf: ParamConfig) -> Dict[str, Parameter]:
        '''
        Convert the argument configuration to JSON-like dictionary.

        :param argconf: Argument configuration to convert.
        :type argconf: ParamConfig
        :return: JSON-like dictionary with the argument configuration.
        :rtype: Dict[str, Parameter]
        '''

        return {arg.name : val for arg, val in argconf.items()}


class ArgParams(Enum):
    '''
    Class to represent the different argument parameters for the command line interface.

    NOTE:   The main rational behind this class is to have a unique name and view of a
            parameters which may be shared across different commands.
    '''

    # Kernel
    Spec           = ArgParam(name="spec",           type=str,   default="szego", help="Kernel: `szego`, `dirichlet:<alpha>` or path to a coefficient CSV file")
    Dimension      = ArgParam(name="d",              type=int,   default=1,       help="Dimension d of the ball B_d")
    Degree         = ArgParam(name="degree",         type=int,   default=200,     help="Degree of the coefficient sequences")
    Exact          = ArgParam(name="exact",          type=bool,  default=False,   help="If to certify with exact (rational or interval) arithmetic")
    Tolerance      = ArgParam(name="tol",            type=float, default=1e-12,   help="Sign tolerance of floating point certification")

    # Truncated space and subspace
    Truncation     = ArgParam(name="N",              type=int,   default=20,      help="Truncation degree of the polynomial space")
    FiberDim       = ArgParam(name="fiber_dim",      type=int,   default=1,       help="Dimension of the coefficient space D")
    Generators     = ArgParam(name="generators",     type=str,   default="",      help="Comma separated generator polynomials, e.g. `z1^2, z1 - 1/2*z2`")
    PointZero      = ArgParam(name="point_zero",     type=str,   default="",      help="Point z0 of the subspace {f : f(z0) = 0}, comma separated coordinates")
    Point          = ArgParam(name="point",          type=str,   default="",      help="Point lambda of the one point extremal function")

    # Scans
    Direction      = ArgParam(name="direction",      type=str,   default="1",     help="Unit vector of the radial ratio scan")
    ScanDirection  = ArgParam(name="scan_direction", type=str,   default="",      help="Unit vector of the boundary isometry scan")
    TMax           = ArgParam(name="tmax",           type=float, default=0.9,     help="Largest radius of the scans")
    TSteps         = ArgParam(name="tsteps",         type=int,   default=10,      help="Number of equispaced radii up to tmax")
    TGrid          = ArgParam(name="tgrid",          type=str,   default="",      help="Explicit radii, comma separated or `start:stop:num`")
    Budget         = ArgParam(name="budget",         type=float, default=1e-8,    help="Largest relative kernel tail accepted at a sampled point")
    SvdTolerance   = ArgParam(name="svd_tol",        type=float, default=1e-7,    help="Singular value threshold of the rank profile")

    # Quadrature
    CirclePoints   = ArgParam(name="circle_points",  type=int,   default=2048,    help="Trapezoid nodes on the circle (d = 1)")
    Samples        = ArgParam(name="samples",        type=int,   default=20000,   help="Monte Carlo samples on the sphere (d >= 2)")
    RandomSeed     = ArgParam(name="seed",           type=int,   default=0,       help="Random state for sampling")

    # Conjecture explorer
    Count          = ArgParam(name="count",          type=int,   default=20,      help="Number of random mass-one b-sequences")
    Support        = ArgParam(name="support",        type=int,   default=6,       help="Largest support of the random b-sequences")

    # Logger
    ExperimentName = ArgParam(name="name",           type=str,   default="innerlab", help="Run name used in the logs")
    OutputDirectory= ArgParam(name="out_dir",        type=str,   default="out",   help="Path to directory to save outputs")
    LogFile        = ArgParam(name="log_file",       type=bool,  default=False,   help="If to also log on file in the output directory")

    # --- MAGIC METHODS ---

    def __str__ (self)  -> str: return self.value.name
    def __repr__(self)  -> str: return str(self)

    # --- UTILITIES ---

    @classmethod
    def names(cls) -> List[str]:
        ''' Names of all the job parameters, i.e. the valid job-file keys. '''

        return [str(arg) for arg in cls]

    @classmethod
    def defaults(cls) -> Dict[str, Parameter]:
        ''' Default job configuration. '''

        return {arg.value.name: arg.value.default for arg in cls}

    @staticmethod
    def str2bool(value: str) -> bool:
        ''' Helper function to deal with boolean input'''

        if isinstance(value, bool):                          return value
        if value.lower() in ('yes', 'true',  't', 'y', '1'): return True
        if value.lower() in ('no',  'false', 'f', 'n', '0'): return False
        raise argparse.ArgumentTypeError(f'Value `{value}` not recognized as a valid boolean value')

    @staticmethod
    def get_parser(
        args:   List[ArgParam] = [],
        parser: ArgumentParser | None = None
    ) -> ArgumentParser:
        '''
        Produces an `ArgumentParser` given a list of input parameters.

        NOTE: Defaults are never set on the parser: a flag not given on the
            command line parses to None, so that it doesn't override the
            job file. Defaults are applied when validating the job configuration.
        '''

        parser = parser if parser is not None else ArgumentParser()

        for arg in args:

            if arg.type != bool:

                parser.add_argument(
                    *arg.flags,
                    dest=arg.name,
                    type=arg.type,
                    help=arg.help,
                    default=None
                )

            else:

                # For boolean parsing we use a more flexible str-to-bool conversion
                parser.add_argument(
                    *arg.flags,
                    dest=arg.name,
                    type=ArgParams.str2bool,
                    nargs='?',
                    const=True,
                    default=None,
                    help=arg.help
                )

        return parser

# --- JOB CONFIGURATION ---

COMMANDS = ('series', 'npcheck', 'extremal', 'ratio-scan', 'inner', 'curvature', 'conjecture45')
''' Commands of the command line, one per experiment. '''

RUN_KEYS = ('name', 'out_dir', 'log_file')
''' Parameters only affecting where and how a run is logged, excluded from the configuration hash. '''


def _coerce(arg: ArgParam, value: Any) -> Parameter:
    ''' Cast a job-file or command line value to the parameter type. '''

    if arg.type == bool:
        return ArgParams.str2bool(value) if isinstance(value, str) else bool(value)

    if arg.type == int:
        # Reject silent truncation of floats, e.g. `N: 2.5`
        if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
            raise ValueError(f'expected an integer, got {value!r}')
        return int(value)

    if arg.type == float and isinstance(value, bool):
        raise ValueError(f'expected a number, got {value!r}')

    return arg.type(value)


@dataclass(frozen=True)
class JobConfig:
    '''
    Validated configuration of a single run. It is created by `from_mapping`
    from a job file merged with command line flags; every field mirrors
    one `ArgParam` of the `ArgParams` enumeration.
    '''

    command        : str
    spec           : str
    d              : int
    degree         : int
    exact          : bool
    tol            : float
    N              : int
    fiber_dim      : int
    generators     : str
    point_zero     : str
    point          : str
    direction      : str
    scan_direction : str
    tmax           : float
    tsteps         : int
    tgrid          : str
    budget         : float
    svd_tol        : float
    circle_points  : int
    samples        : int
    seed           : int
    count          : int
    support        : int
    name           : str
    out_dir        : str
    log_file       : bool

    # Lower bounds of the numeric fields as (bound, strict)
    BOUNDS = {
        'd'             : (1,  False),
        'degree'        : (0,  False),
        'tol'           : (0,  False),
        'N'             : (0,  False),
        'fiber_dim'     : (1,  False),
        'tmax'          : (0,  True ),
        'tsteps'        : (1,  False),
        'budget'        : (0,  True ),
        'svd_tol'       : (0,  True ),
        'circle_points' : (1,  False),
        'samples'       : (2,  False),
        'seed'          : (0,  False),
        'count'         : (1,  False),
        'support'       : (2,  False),
    }

    def __post_init__(self):

        if self.command not in COMMANDS:
            raise ConfigError(field='command', msg=f'Unknown command `{self.command}`, valid commands are {", ".join(COMMANDS)}')

        for key, (bound, strict) in self.BOUNDS.items():
            value = getattr(self, key)
            if value < bound or (strict and value == bound):
                raise ConfigError(field=key, msg=f'Expected a value {">" if strict else ">="} {bound}, got {value}')

        if self.tmax >= 1:
            raise ConfigError(field='tmax', msg=f'Radii must be smaller than one, got {self.tmax}')

    # --- FACTORY ---

    @classmethod
    def from_mapping(cls, command: str, mapping: Dict[str, Any]) -> JobConfig:
        '''
        Validate a raw configuration: keys must be parameter names, missing
        keys take the parameter default and values are cast to the parameter type.

        :param command: Command to run.
        :type command: str
        :param mapping: Job-file content already overridden by the given flags.
        :type mapping: Dict[str, Any]
        :raises ConfigError: On unknown keys, values of the wrong type or out of range.
        :return: The validated configuration.
        :rtype: JobConfig
        '''

        valid = ArgParams.names()

        for key in mapping:
            if key not in valid:
                raise ConfigError(field=key, msg='Unknown configuration key')

        merged = overwrite_dict(ArgParams.defaults(), mapping)
        values = {}

        for arg in ArgParams:
            try:
                values[arg.value.name] = _coerce(arg.value, merged[arg.value.name])
            except (TypeError, ValueError, argparse.ArgumentTypeError) as e:
                raise ConfigError(field=arg.value.name, msg=f'Invalid {arg.value.type.__name__} value: {e}') from e

        return cls(command=command, **values)

    # --- SERIALIZATION ---

    @property
    def param_config(self) -> ParamConfig:
        ''' The configuration as a mapping from parameter to value. '''

        return {arg.value: getattr(self, arg.value.name) for arg in ArgParams}

    def to_json(self) -> Dict[str, Parameter]:
        ''' Canonical JSON form of the configuration, command included. '''

        return {'command': self.command, **ArgParam.argconf_to_json(self.param_config)}

    def outcome_json(self) -> Dict[str, Parameter]:
        ''' The configuration without the logging parameters, the part that determines the outputs. '''

        return {k: v for k, v in self.to_json().items() if k not in RUN_KEYS}

    @property
    def hash(self) -> str:
        ''' Content hash naming the outputs, independent of the logging parameters. '''

        return content_hash(self.outcome_json())

    @property
    def kernel_degree(self) -> int:
        ''' Degree of the kernel coefficients, enough for products of two truncated polynomials. '''

        return max(self.degree, 2 * self.N)
