'''
Input/output helpers: JSON files, CSV tables through pandas and the
dense matrix text format used for the inner multiplier operators.
The formats are documented in docs/formats.md.
'''

import json
import os
from typing import Any, Dict, Sequence

import pandas as pd
from numpy.typing import NDArray

FLOAT_FORMAT = '%.17g'
''' Floating output uses 17 significant digits everywhere. '''

MATRIX_HEADER = '# innerlab matrix v1'

# --- JSON ---

def read_json(path: str) -> Dict[str, Any]:
    '''
    Read JSON data from a file.

    :param path: The path to the JSON file.
    :type path: str
    :raises FileNotFoundError: If the specified file is not found.
    :return: The JSON data read from the file.
    :rtype: Dict[str, Any]
    '''

    try:
        with open(path, 'r') as f:
            data = json.load(f)
        return data
    except FileNotFoundError:
        raise FileNotFoundError(f'File not found at path: {path}')


def json_dumps(data: Dict[str, Any]) -> str:
    ''' Deterministic JSON text: sorted keys, four spaces indentation, trailing newline. '''

    return json.dumps(data, indent=4, sort_keys=True) + '\n'


def save_json(data: Dict[str, Any], path: str):
    '''
    Save JSON data to a file.

    :param data: The JSON data to be saved.
    :type data: Dict[str, Any]
    :param path: The path to save the JSON file.
    :type path: str
    '''

    save_text(json_dumps(data), path=path)

# --- TEXT ---

def save_text(text: str, path: str):
    ''' Write a text file with unix newlines. '''

    with open(path, 'w', newline='\n') as f:
        f.write(text)


# --- CSV ---

def csv_text(df: pd.DataFrame, header: bool = True) -> str:
    '''
    Render a table as CSV text with 17 significant digits for floating columns.

    :param df: Table to render.
    :type df: pd.DataFrame
    :param header: If to write the column names, defaults to True.
    :type header: bool, optional
    :return: CSV text.
    :rtype: str
    '''

    return df.to_csv(index=False, header=header, float_format=FLOAT_FORMAT, lineterminator='\n')


def read_csv_rows(path: str) -> pd.DataFrame:
    '''
    Read a header-less CSV file keeping every cell as a string,
    so that big integers survive without rounding.
    '''

    if not os.path.exists(path):
        raise FileNotFoundError(f'File not found at path: {path}')

    return pd.read_csv(path, header=None, dtype=str, skipinitialspace=True)

# --- MATRICES ---

def format_complex(z: complex) -> str:
    ''' Format a complex number as `re+imj` with 17 significant digits on both parts. '''

    return f'{z.real:.17g}{z.imag:+.17g}j'


def matrix_text(matrix: NDArray, row_labels: Sequence[str]) -> str:
    '''
    Render a dense complex matrix in the row-major text format:
    a magic header line, the shape, the labels of the rows (the
    graded lexicographic basis of the truncated space) and then
    one line per row with space separated entries.

    :param matrix: Matrix to render [rows x cols].
    :type matrix: NDArray
    :param row_labels: Label of each row.
    :type row_labels: Sequence[str]
    :return: Text representation.
    :rtype: str
    '''

    rows, cols = matrix.shape

    if len(row_labels) != rows:
        raise ValueError(f'Expected {rows} row labels, got {len(row_labels)}')

    lines = [
        MATRIX_HEADER,
        f'# shape {rows} {cols}',
        f'# basis {" ".join(row_labels)}',
    ]
    lines.extend(' '.join(format_complex(complex(z)) for z in row) for row in matrix)

    return '\n'.join(lines) + '\n'

