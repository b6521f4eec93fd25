'''
This module implements the arithmetic on the coefficient sequences of a U-invariant kernel

    k_λ(z) = Σ a_n <z, λ>^n,        1 - 1 / Σ a_n x^n = Σ b_n x^n

relating the kernel coefficients {a_n} to the coefficients {b_n} of its Nevanlinna-Pick
representation. The kernel is a complete Nevanlinna-Pick kernel iff every b_n is nonnegative.

Sequences live in one of three arithmetic modes:
- `exact`: python `Fraction` entries, signs are decided exactly;
- `float`: python floats, signs are decided up to a tolerance;
- `interval`: `mpmath.iv` intervals, signs are decided rigorously or left undecided.

The module implements:
1. CoeffSeq: a truncated coefficient sequence with its factories and CSV serialization.
2. The reciprocal and forward recursions between {a_n} and {b_n}.
3. Certification routines: `np_certify` (direct sign test) and `hardy_check` (sufficient ratio criterion).
4. The evidence harness for the mass-one conjecture, `conjecture_evidence`.
'''

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Sequence, Tuple

import numpy as np
import pandas as pd
from mpmath import iv
from numpy.typing import NDArray
from scipy.special import zeta

from innerlab.utils.errors import ConfigError
from innerlab.utils.io_ import csv_text, read_csv_rows
from innerlab.utils.logger import Logger, SilentLogger
from innerlab.utils.types import Scalar

# --- CONSTANTS ---

EXACT_MAX_DEGREE   = 500
''' Largest degree for which exact arithmetic is the default. '''

FLOAT_TOLERANCE    = 1e-12
''' Default sign tolerance in floating mode. '''

INTERVAL_PRECISION = 512
''' Working precision in bits of interval mode. '''

# --- MODES ---

class SeqMode(str, Enum):
    ''' Arithmetic mode of a coefficient sequence. '''

    Exact    = 'exact'
    Float    = 'float'
    Interval = 'interval'

    def __str__(self) -> str: return self.value


@contextmanager
def interval_precision(bits: int = INTERVAL_PRECISION) -> Iterator[None]:
    '''
    Temporarily set the precision of the `mpmath.iv` context.

    NOTE: The interval context is global to mpmath and, unlike the
          floating one, has no `workprec` manager.
    '''

    old = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = old


def _to_interval(x: Scalar) -> Any:
    ''' Enclose an exact or float scalar into an interval. '''

    if isinstance(x, Fraction):
        return iv.mpf(x.numerator) / iv.mpf(x.denominator)
    return iv.mpf(x)


def default_mode(N: int) -> SeqMode:
    ''' Exact arithmetic up to `EXACT_MAX_DEGREE`, floating point beyond. '''

    return SeqMode.Exact if N <= EXACT_MAX_DEGREE else SeqMode.Float

# --- SIGN TESTS ---

def is_negative(x: Scalar, mode: SeqMode, tol: float = FLOAT_TOLERANCE) -> bool:
    '''
    Whether the entry is certainly negative: exactly in exact mode,
    below `-tol` in float mode, with a negative upper endpoint in interval mode.
    '''

    match mode:
        case SeqMode.Exact:    return x < 0
        case SeqMode.Float:    return x < -tol
        case SeqMode.Interval: return float(x.b) < 0

def is_nonnegative(x: Scalar, mode: SeqMode, tol: float = FLOAT_TOLERANCE) -> bool:
    ''' Whether the entry is certainly nonnegative (see `is_negative`). '''

    match mode:
        case SeqMode.Exact:    return x >= 0
        case SeqMode.Float:    return x >= -tol
        case SeqMode.Interval: return float(x.a) >= 0

def to_float(x: Scalar) -> float:
    ''' Float value of a scalar of any mode, intervals are reduced to their midpoint. '''

    if isinstance(x, (Fraction, float, int)):
        return float(x)
    return float(x.mid)

# --- COEFFICIENT SEQUENCE ---

@dataclass(frozen=True)
class CoeffSeq:
    '''
    Truncated coefficient sequence (c_0, ..., c_N) of a formal power series in one variable.
    It houses both the kernel coefficients {a_n} and the representation coefficients {b_n}.
    '''

    coeffs : Tuple[Scalar, ...]
    mode   : SeqMode = SeqMode.Exact

    def __post_init__(self):

        if not self.coeffs:
            raise ValueError('A coefficient sequence needs at least the entry of index 0')

        if self.mode == SeqMode.Exact:
            # Integers are promoted, floats are rejected to avoid silent inexactness
            coeffs = []
            for c in self.coeffs:
                if isinstance(c, float):
                    raise ValueError(f'Exact sequences cannot hold floating entries, got {c}')
                coeffs.append(Fraction(c))
            object.__setattr__(self, 'coeffs', tuple(coeffs))

        elif self.mode == SeqMode.Float:
            object.__setattr__(self, 'coeffs', tuple(to_float(c) for c in self.coeffs))

    # --- MAGIC METHODS ---

    def __len__    (self)         -> int:    return len(self.coeffs)
    def __getitem__(self, n: int) -> Scalar: return self.coeffs[n]
    def __iter__   (self)         -> Iterator[Scalar]: return iter(self.coeffs)

    def __str__(self) -> str:

        head = ', '.join(str(c) for c in self.coeffs[:5])
        return f'CoeffSeq[{self.mode}; degree: {self.degree}; ({head}{", ..." if len(self) > 5 else ""})]'

    def __repr__(self) -> str: return str(self)

    # --- PROPERTIES ---

    @property
    def degree(self) -> int: return len(self.coeffs) - 1

    @property
    def exact(self) -> bool: return self.mode == SeqMode.Exact

    # --- FACTORIES ---

    @classmethod
    def from_values(cls, values: Sequence[Any], mode: SeqMode | str | None = None) -> CoeffSeq:
        '''
        Create a sequence from a list of values. If the mode is not given
        it is exact when every value is an integer or a `Fraction`, float otherwise.
        '''

        if mode is None:
            mode = SeqMode.Exact if all(isinstance(v, (int, Fraction)) for v in values) else SeqMode.Float

        mode = SeqMode(mode)

        if mode == SeqMode.Interval:
            with interval_precision():
                values = [_to_interval(v) for v in values]

        return cls(coeffs=tuple(values), mode=mode)

    @classmethod
    def szego(cls, N: int) -> CoeffSeq:
        ''' Kernel coefficients a_n = 1 of the Szegő (Drury-Arveson) kernel. '''

        return cls(coeffs=tuple(Fraction(1) for _ in range(N + 1)), mode=SeqMode.Exact)

    @classmethod
    def dirichlet(cls, alpha: Fraction | int | float, N: int, mode: SeqMode | str | None = None) -> CoeffSeq:
        '''
        Kernel coefficients a_n = (n+1)^(-alpha) of the weighted Dirichlet space.

        By default integer exponents produce an exact sequence and non-integer
        exponents an interval one, the latter being the only rigorous choice
        for irrational entries.

        :param alpha: Weight exponent.
        :type alpha: Fraction | int | float
        :param N: Degree of the sequence.
        :type N: int
        :param mode: Arithmetic mode, defaults to exact or interval depending on alpha.
        :type mode: SeqMode | str | None, optional
        '''

        alpha = Fraction(alpha)

        if mode is None:
            mode = SeqMode.Exact if alpha.denominator == 1 else SeqMode.Interval

        mode = SeqMode(mode)

        match mode:

            case SeqMode.Exact:

                if alpha.denominator != 1:
                    raise ValueError(f'Exact Dirichlet coefficients need an integer exponent, got {alpha}')

                coeffs = [Fraction(n + 1) ** (-alpha.numerator) for n in range(N + 1)]

            case SeqMode.Float:

                coeffs = ((np.arange(N + 1) + 1.) ** (-float(alpha))).tolist()

            case SeqMode.Interval:

                with interval_precision():
                    alpha_iv = iv.mpf(alpha.numerator) / iv.mpf(alpha.denominator)
                    coeffs = [iv.exp(-alpha_iv * iv.log(iv.mpf(n + 1))) for n in range(N + 1)]
                    # The entry of index 0 is exactly one
                    coeffs[0] = iv.mpf(1)

        return cls(coeffs=tuple(coeffs), mode=mode)

    @classmethod
    def from_csv(cls, path: str) -> CoeffSeq:
        '''
        Read a sequence written by `to_csv_text`: rows `index,numerator,denominator`
        for exact sequences and `index,value` for floating ones.

        :raises ConfigError: If the file is malformed.
        '''

        try:
            df = read_csv_rows(path)
        except FileNotFoundError as e:
            raise ConfigError(field='spec', msg=str(e)) from e

        idx = [int(i) for i in df.iloc[:, 0]]
        if idx != list(range(len(idx))):
            raise ConfigError(field='spec', msg=f'Indices of {path} must be consecutive starting from 0')

        match df.shape[1]:
            case 3: return cls(coeffs=tuple(Fraction(int(p), int(q)) for p, q in zip(df.iloc[:, 1], df.iloc[:, 2])), mode=SeqMode.Exact)
            case 2: return cls(coeffs=tuple(float(v) for v in df.iloc[:, 1]), mode=SeqMode.Float)
            case _: raise ConfigError(field='spec', msg=f'Expected 2 or 3 columns in {path}, got {df.shape[1]}')

    # --- CONVERSIONS ---

    def as_array(self) -> NDArray[np.float64]:
        ''' Entries as a numpy array of floats. '''

        return np.array([to_float(c) for c in self.coeffs], dtype=np.float64)

    def truncate(self, N: int) -> CoeffSeq:
        ''' Sequence restricted to the indices 0..N. '''

        if N > self.degree:
            raise ValueError(f'Cannot truncate a sequence of degree {self.degree} to degree {N}')

        return CoeffSeq(coeffs=self.coeffs[:N + 1], mode=self.mode)

    def to_csv_text(self) -> str:
        '''
        CSV serialization without header: `index,numerator,denominator` in exact mode,
        `index,value` in float mode and `index,lower,upper` in interval mode.
        '''

        match self.mode:
            case SeqMode.Exact:
                df = pd.DataFrame({
                    'index': range(len(self)),
                    'num'  : [str(c.numerator)   for c in self.coeffs],
                    'den'  : [str(c.denominator) for c in self.coeffs],
                })
            case SeqMode.Float:
                df = pd.DataFrame({'index': range(len(self)), 'value': list(self.coeffs)})
            case SeqMode.Interval:
                df = pd.DataFrame({
                    'index': range(len(self)),
                    'lower': [float(c.a) for c in self.coeffs],
                    'upper': [float(c.b) for c in self.coeffs],
                })

        return csv_text(df, header=False)

# --- RECURSIONS ---

def _check_head(seq: CoeffSeq, value: int, name: str):

    head = seq[0]
    ok   = head == value if seq.mode != SeqMode.Interval else (float(head.a) == value and float(head.b) == value)

    if not ok:
        raise ValueError(f'Expected {name}[0] = {value}, got {head}')


def reciprocal_coeffs(a: CoeffSeq) -> CoeffSeq:
    '''
    Compute the coefficients {b_n} of 1 - 1/(Σ a_n x^n) through the degree of `a`,
    by long division of power series

        b_n = a_n - Σ_{k=1}^{n-1} b_k a_{n-k}

    :param a: Kernel coefficients with a_0 = 1.
    :type a: CoeffSeq
    :raises ValueError: If the kernel is not normalized.
    :return: Representation coefficients, b_0 = 0, in the mode of `a`.
    :rtype: CoeffSeq
    '''

    _check_head(a, 1, 'a')

    def compute() -> List[Scalar]:

        zero = a[0] - a[0]
        b    = [zero]
        for n in range(1, len(a)):
            acc = a[n]
            for k in range(1, n):
                acc = acc - b[k] * a[n - k]
            b.append(acc)
        return b

    if a.mode == SeqMode.Interval:
        with interval_precision():
            b = compute()
    else:
        b = compute()

    return CoeffSeq(coeffs=tuple(b), mode=a.mode)


def forward_coeffs(b: CoeffSeq, N: int) -> CoeffSeq:
    '''
    Recover the kernel coefficients from the representation ones with the recursion

        a_0 = 1,    a_n = Σ_{k=1}^{n} b_k a_{n-k}

    Entries of `b` beyond its degree are taken as zero, so finitely
    supported sequences can be extended to any degree N.

    :param b: Representation coefficients with b_0 = 0.
    :type b: CoeffSeq
    :param N: Degree of the output sequence.
    :type N: int
    :raises ValueError: If b_0 is not zero.
    :return: Kernel coefficients through degree N.
    :rtype: CoeffSeq
    '''

    _check_head(b, 0, 'b')

    if N < 0:
        raise ValueError(f'Degree must be nonnegative, got {N}')

    def compute() -> List[Scalar]:

        one = b[0] - b[0] + 1
        a   = [one]
        for n in range(1, N + 1):
            acc = b[0]
            for k in range(1, min(n, b.degree) + 1):
                acc = acc + b[k] * a[n - k]
            a.append(acc)
        return a

    if b.mode == SeqMode.Interval:
        with interval_precision():
            a = compute()
    else:
        a = compute()

    return CoeffSeq(coeffs=tuple(a), mode=b.mode)

# --- CERTIFICATES ---

class CertificateStatus(str, Enum):

    Certified    = 'certified'
    Refuted      = 'refuted'
    Inconclusive = 'inconclusive'

    def __str__(self) -> str: return self.value


class CertificateMethod(str, Enum):

    HardyCriterion   = 'hardy-criterion'
    DirectReciprocal = 'direct-reciprocal'

    def __str__(self) -> str: return self.value


@dataclass
class NPCertificate:
    '''
    Outcome of a Nevanlinna-Pick certification of a kernel coefficient sequence.
    A refuted certificate always points at the first certainly negative b_n.
    '''

    status               : CertificateStatus
    method               : CertificateMethod
    degree               : int
    mode                 : SeqMode
    min_coefficient      : float
    first_negative_index : int | None = None
    tolerance            : float | None = None
    b                    : CoeffSeq | None = field(default=None, repr=False)
    ''' Representation coefficients, only for the direct method. '''

    @property
    def certified(self) -> bool: return self.status == CertificateStatus.Certified

    def to_json(self) -> Dict[str, Any]:

        return {
            'status'               : str(self.status),
            'method'               : str(self.method),
            'degree'               : self.degree,
            'mode'                 : str(self.mode),
            'min_coefficient'      : self.min_coefficient,
            'first_negative_index' : self.first_negative_index,
            'tolerance'            : self.tolerance,
        }


def np_certify(
    a      : CoeffSeq,
    N      : int | None = None,
    tol    : float = FLOAT_TOLERANCE,
    logger : Logger = SilentLogger()
) -> NPCertificate:
    '''
    Certify the complete Nevanlinna-Pick property through degree N by testing the signs
    of the representation coefficients b_1..b_N.

    The certificate is refuted at the first certainly negative b_n and certified when every
    b_n is certainly nonnegative. Interval sequences whose enclosure straddles zero
    leave the certificate inconclusive. In exact mode the tolerance is ignored.

    :param a: Kernel coefficients with a_0 = 1.
    :type a: CoeffSeq
    :param N: Certification degree, defaults to the degree of `a`.
    :type N: int | None, optional
    :param tol: Sign tolerance of float mode, defaults to 1e-12.
    :type tol: float, optional
    :param logger: Logger to report the outcome, defaults to silent.
    :type logger: Logger, optional
    :return: The certificate, holding the computed b-sequence.
    :rtype: NPCertificate
    '''

    N = a.degree if N is None else N
    b = reciprocal_coeffs(a.truncate(N))

    status      = CertificateStatus.Certified
    first_neg   = None
    min_coef    = to_float(b[0]) if N == 0 else min(to_float(c) for c in b.coeffs[1:])

    for n in range(1, N + 1):

        if is_negative(b[n], b.mode, tol):
            status, first_neg = CertificateStatus.Refuted, n
            break

        if not is_nonnegative(b[n], b.mode, tol):
            status = CertificateStatus.Inconclusive

    logger.info(f'NP certification through degree {N} ({a.mode}): {status}, min b_n = {min_coef:.3e}'
                + (f', first negative index {first_neg}' if first_neg is not None else ''))

    return NPCertificate(
        status=status,
        method=CertificateMethod.DirectReciprocal,
        degree=N,
        mode=a.mode,
        min_coefficient=min_coef,
        first_negative_index=first_neg,
        tolerance=None if a.exact else tol,
        b=b,
    )


def hardy_check(a: CoeffSeq, tol: float = FLOAT_TOLERANCE) -> NPCertificate:
    '''
    Sufficient criterion for the complete Nevanlinna-Pick property: when the ratios
    a_{n+1}/a_n increase to a limit not above one, the representation coefficients
    are nonnegative. The check is certified when the ratios are nondecreasing over
    the available range and the last one is at most one, inconclusive otherwise;
    the criterion never refutes.

    :param a: Positive kernel coefficients.
    :type a: CoeffSeq
    :param tol: Comparison tolerance of float mode, defaults to 1e-12.
    :type tol: float, optional
    :raises ValueError: If some coefficient is not positive.
    :return: Certificate with method `hardy-criterion`.
    :rtype: NPCertificate
    '''

    for n, c in enumerate(a):
        positive = float(c.a) > 0 if a.mode == SeqMode.Interval else c > 0
        if not positive:
            raise ValueError(f'Hardy criterion needs positive coefficients, a[{n}] = {c}')

    def compute() -> Tuple[List[Scalar], bool]:

        ratios = [a[n + 1] / a[n] for n in range(a.degree)]

        monotone = all(
            is_nonnegative(ratios[n + 1] - ratios[n], a.mode, tol)
            for n in range(len(ratios) - 1)
        )
        bounded = not ratios or is_nonnegative(1 - ratios[-1], a.mode, tol)

        return ratios, monotone and bounded

    if a.mode == SeqMode.Interval:
        with interval_precision():
            ratios, ok = compute()
    else:
        ratios, ok = compute()

    return NPCertificate(
        status=CertificateStatus.Certified if ok else CertificateStatus.Inconclusive,
        method=CertificateMethod.HardyCriterion,
        degree=a.degree,
        mode=a.mode,
        min_coefficient=min(to_float(r) for r in ratios) if ratios else 1.,
        tolerance=None if a.exact else tol,
    )

# --- RATIOS AND MASS ---

def ratio_tail(a: CoeffSeq) -> List[Scalar]:
    '''
    Ratio sequence (a_n / a_{n+1})_{n < N}. Its last value is the tail-limit
    estimate, no extrapolation is attempted.

    :raises ValueError: If some coefficient is zero.
    '''

    for n, c in enumerate(a):
        if to_float(c) == 0:
            raise ValueError(f'Ratio sequence undefined, a[{n}] = 0')

    if a.mode == SeqMode.Interval:
        with interval_precision():
            return [a[n] / a[n + 1] for n in range(a.degree)]

    return [a[n] / a[n + 1] for n in range(a.degree)]


def bn_mass(b: CoeffSeq, tol: float = FLOAT_TOLERANCE) -> Scalar:
    '''
    Partial mass Σ_{n=1}^{N} b_n of a representation sequence, in the mode of `b`.
    For complete Nevanlinna-Pick kernels it lies in [0, 1] and tends to one
    exactly when the kernel is unbounded on the diagonal.

    :raises ValueError: If b_0 is not zero or some entry is negative.
    '''

    _check_head(b, 0, 'b')

    for n, c in enumerate(b):
        if is_negative(c, b.mode, tol):
            raise ValueError(f'Mass is defined for nonnegative sequences, b[{n}] = {c}')

    if b.mode == SeqMode.Interval:
        with interval_precision():
            return sum(b.coeffs[1:], b[0])

    return sum(b.coeffs[1:], b[0])


def dirichlet_mass_limit(alpha: Fraction | float) -> float:
    '''
    Total mass Σ b_n of the weighted Dirichlet kernel a_n = (n+1)^(-alpha).
    It equals 1 - 1/ζ(alpha) when the kernel series converges on the
    boundary (alpha > 1) and one otherwise.
    '''

    alpha = float(alpha)
    return 1. - 1. / float(zeta(alpha)) if alpha > 1 else 1.

# --- CONJECTURE HARNESS ---

@dataclass
class ConjectureEvidence:
    '''
    Evidence about the statement "if Σ b_n = 1 then a_n/a_{n+1} -> 1".
    A counterexample candidate requires exact arithmetic, an exact unit
    mass and a ratio tail far from one.
    '''

    degree                   : int
    mode                     : SeqMode
    mass                     : float
    hypothesis               : bool | None
    ''' Whether Σ b_n = 1 is known to hold, None if undecidable from the data. '''
    tail_estimate            : float
    gap                      : float
    counterexample_candidate : bool
    support                  : int | None = None

    def to_json(self) -> Dict[str, Any]:

        return {
            'degree'                   : self.degree,
            'mode'                     : str(self.mode),
            'mass'                     : self.mass,
            'hypothesis'               : self.hypothesis,
            'tail_estimate'            : self.tail_estimate,
            'gap'                      : self.gap,
            'counterexample_candidate' : self.counterexample_candidate,
            'support'                  : self.support,
        }


def random_mass_one_sequence(rng: np.random.Generator, support: int) -> CoeffSeq:
    '''
    Draw an exact finitely supported sequence b with b_0 = 0, b_1 > 0, nonnegative
    entries and Σ b_n = 1. The support size is uniform in 2..support and the weights
    are random integers normalized by their sum.

    :param rng: Random generator.
    :type rng: np.random.Generator
    :param support: Largest index with a nonzero entry, at least 2.
    :type support: int
    '''

    if support < 2:
        raise ValueError(f'Support must be at least 2, got {support}')

    size    = int(rng.integers(2, support + 1))
    weights = [int(rng.integers(1, 10))] + [int(w) for w in rng.integers(0, 10, size=size - 1)]
    total   = sum(weights)

    return CoeffSeq(coeffs=tuple([Fraction(0)] + [Fraction(w, total) for w in weights]), mode=SeqMode.Exact)


def conjecture_evidence(
    b          : CoeffSeq,
    N          : int,
    tol        : float = 1e-3,
    mass_limit : float | None = None
) -> ConjectureEvidence:
    '''
    Collect evidence for the mass-one conjecture on a representation sequence:
    extend it with `forward_coeffs` to degree N and inspect the ratio tail.

    :param b: Representation coefficients. Finitely supported sequences are
        taken as zero beyond their degree.
    :type b: CoeffSeq
    :param N: Degree of the forward recursion.
    :type N: int
    :param tol: Gap |tail - 1| above which the ratio tail is deemed not convergent to one.
    :type tol: float, optional
    :param mass_limit: Known total mass of the full sequence, for truncations of
        infinite sequences whose partial sums do not decide the hypothesis.
    :type mass_limit: float | None, optional
    :return: The collected evidence.
    :rtype: ConjectureEvidence
    '''

    a      = forward_coeffs(b, N)
    tail   = to_float(ratio_tail(a)[-1])
    gap    = abs(tail - 1)
    mass   = bn_mass(b)

    if mass_limit is not None:
        hypothesis = abs(mass_limit - 1) <= FLOAT_TOLERANCE
        mass_value = mass_limit
    elif b.exact:
        hypothesis = mass == 1
        mass_value = float(mass)
    else:
        # A floating partial sum cannot establish the hypothesis
        hypothesis = None
        mass_value = to_float(mass)

    support = max((n for n, c in enumerate(b) if to_float(c) != 0), default=0)

    return ConjectureEvidence(
        degree=N,
        mode=b.mode,
        mass=mass_value,
        hypothesis=hypothesis,
        tail_estimate=tail,
        gap=gap,
        counterexample_candidate=bool(b.exact and mass_limit is None and hypothesis and gap > tol),
        support=support,
    )
