'''
This is a general purpose file containing utility functions that are used across the entire innerlab package.
'''

import hashlib
import json
from copy import deepcopy
from typing import Any, Callable, Dict, TypeVar

import numpy as np
from numpy.typing import NDArray

# --- TYPING ---

# Type generics
T = TypeVar('T')
D = TypeVar('D')

# Default for None with producer function
def lazydefault(var : T | None, expr : Callable[[], D]) -> T | D:
    return expr() if var is None else var

# --- NUMPY ---

def hermitian_part(A: NDArray) -> NDArray:
    ''' Return (A + A*)/2, removing the rounding asymmetry of a self-adjoint matrix. '''

    return (A + A.conj().T) / 2

def as_point(value: Any, d: int | None = None) -> NDArray[np.complex128]:
    '''
    Promote a scalar or a sequence to a one-dimensional complex point.

    :param value: Complex scalar or sequence of complex numbers.
    :type value: Any
    :param d: Expected dimension, not checked if None.
    :type d: int | None, optional
    :return: Point as a complex array.
    :rtype: NDArray[np.complex128]
    '''

    point = np.atleast_1d(np.asarray(value, dtype=np.complex128))

    if point.ndim != 1:
        raise ValueError(f'A point must be one-dimensional, got shape {point.shape}')

    if d is not None and point.shape[0] != d:
        raise ValueError(f'Expected a point of dimension {d}, got {point.shape[0]}')

    return point

# --- TIME ---

def stringfy_time(sec: int | float) -> str:
    ''' Converts number of seconds into a hour-minute-second string representation. '''

    # Round seconds
    sec = int(sec)

    # Compute hours, minutes and seconds
    hours = sec // 3600
    sec %= 3600
    minutes = sec // 60
    sec %= 60

    # Handle possible formats
    time_str = ""
    if hours > 0:
        time_str += f"{hours} hour{'s' if hours > 1 else ''}, "
    if minutes > 0:
        time_str += f"{minutes} minute{'s' if minutes > 1 else ''}, "
    time_str += f"{sec} second{'s' if sec != 1 else ''}"

    return time_str

# --- DICTIONARIES ---

def overwrite_dict(a: Dict, b: Dict) -> Dict:
    '''
    Overwrite keys of a dictionary A with those of a second
    dictionary B if their values are not None. Keys only present
    in B are added.
    '''

    a_copy = deepcopy(a)

    for key, value in b.items():
        if value is not None:
            a_copy[key] = value

    return a_copy

def content_hash(data: Dict[str, Any], length: int = 12) -> str:
    '''
    Deterministic short hash of a JSON-serializable dictionary,
    computed on its canonical (sorted keys, compact) encoding.

    :param data: Dictionary to hash.
    :type data: Dict[str, Any]
    :param length: Number of hexadecimal digits to keep, defaults to 12.
    :type length: int, optional
    :return: Hexadecimal digest prefix.
    :rtype: str
    '''

    canonical = json.dumps(data, sort_keys=True, separators=(',', ':'))

    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:length]
