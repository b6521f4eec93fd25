'''
This file implements the Message dataclass that is passed through the
`init`, `run` and `finish` steps of an experiment.

Besides the run timing it collects everything the `finish` step needs to write:
the artifacts produced by the run and the numerical bookkeeping (tolerances
and tail bounds) that goes into the run manifest.
'''

from dataclasses import dataclass, field
from typing import Any, Dict


@dataclass
class Message:
    '''
    The dataclass is an auxiliary generic component that is shared among the experiment data-flow.
    '''

    start_time   : float = 0
    end_time     : float = 0

    @property
    def elapsed_time(self) -> float:

        if not self.start_time:
            raise ValueError('Cannot compute elapsed time: start time not set')

        if not self.end_time:
            raise ValueError('Cannot compute elapsed time: end time not set')

        return self.end_time - self.start_time


@dataclass
class LabMessage(Message):
    '''
    Message of an innerlab run. Artifacts are stored as rendered text
    keyed by their file suffix, so that the file names can be derived
    from the configuration hash only at the end of the run.
    '''

    artifacts   : Dict[str, str]   = field(default_factory=dict)
    ''' Mapping from file suffix (e.g. `.csv`, `.S.txt`) to file content. '''

    tolerances  : Dict[str, float] = field(default_factory=dict)
    ''' Every tolerance used by the run, echoed in the manifest. '''

    tail_bounds : Dict[str, float] = field(default_factory=dict)
    ''' Truncation tail bounds and omitted masses met during the run. '''

    summary     : Dict[str, Any]   = field(default_factory=dict)
    ''' Short result summary, echoed in the manifest and in the log. '''

    written     : Dict[str, str]   = field(default_factory=dict)
    ''' Paths of the files written by the `finish` step, keyed by suffix. '''
