'''
Exception hierarchy of the innerlab package.

The command line maps the two families to process exit codes:
- ConfigError and its subclasses exit with status 1;
- NumericalContractError and its subclasses exit with status 2.
'''

from __future__ import annotations

from typing import Any


class InnerlabError(Exception):
    ''' Base class for all the errors raised by the package. '''


class ConfigError(InnerlabError, ValueError):
    '''
    Invalid job configuration. It carries the name of the offending
    field (job-file key or command line flag) for the diagnostic.
    '''

    def __init__(self, field: str, msg: str) -> None:

        self.field = field
        super().__init__(f'[{field}] {msg}')


class PolyParseError(ConfigError):
    ''' Polynomial text not matching the generator grammar. '''

    def __init__(self, text: str, position: int, msg: str) -> None:

        self.text     = text
        self.position = position

        # Caret line pointing at the offending character
        pointer = f'{text}\n{" " * position}^'
        super().__init__(field='generators', msg=f'{msg} at position {position}\n{pointer}')


class NumericalContractError(InnerlabError, ArithmeticError):
    '''
    A numerical contract was violated, e.g. a significantly negative
    eigenvalue in the inner multiplier construction. It carries the offending value.
    '''

    def __init__(self, msg: str, value: Any = None) -> None:

        self.value = value
        super().__init__(msg if value is None else f'{msg} (offending value: {value})')


class TruncationBudgetError(NumericalContractError):
    ''' A sampling point is too close to the boundary for the truncation degree. '''


class KernelDomainError(InnerlabError, ValueError):
    ''' Point outside the closed ball or boundary evaluation of a divergent kernel. '''


class DegreeOverflowError(InnerlabError, ValueError):
    ''' A product would exceed the degree of the target truncated space. '''
