'''
Command line entry point of innerlab.

    innerlab <command> [--config job.json] [--<param> value ...]

A run is configured by an optional JSON job file whose keys are parameter names,
overridden by the command line flags. The validated configuration is dispatched to the
experiment of the command, which writes its artifacts in the output directory.

Exit status:
- 0 on success;
- 1 on configuration errors, with the offending field;
- 2 on numerical contract violations, with the offending value.
'''

from __future__ import annotations

import json
import sys
from argparse import ArgumentParser
from typing import Any, Dict, List

from innerlab.experiment import EXPERIMENTS
from innerlab.utils.errors import ConfigError, InnerlabError, NumericalContractError
from innerlab.utils.io_ import read_json
from innerlab.utils.logger import Logger, LoguruLogger
from innerlab.utils.message import LabMessage
from innerlab.utils.misc import overwrite_dict
from innerlab.utils.parameters import COMMANDS, ArgParams, JobConfig

EXIT_OK        = 0
EXIT_CONFIG    = 1
EXIT_NUMERICAL = 2


class JobParser(ArgumentParser):
    ''' Argument parser reporting invalid flags as configuration errors instead of exiting. '''

    def error(self, message: str):
        raise ConfigError(field='argv', msg=message)


def get_parser() -> ArgumentParser:
    ''' Command line parser: the command, the job file and one flag per parameter. '''

    parser = JobParser(prog='innerlab', description='Inner multipliers on complete Nevanlinna-Pick spaces', allow_abbrev=False)

    parser.add_argument('command', choices=COMMANDS, help='Experiment to run')
    parser.add_argument('--config', type=str, default=None, help='JSON job file, overridden by the flags')

    return ArgParams.get_parser(args=[arg.value for arg in ArgParams], parser=parser)


def read_job_file(fp: str, command: str) -> Dict[str, Any]:
    '''
    Read a JSON job file. The optional `command` key must match the command line one.

    :raises ConfigError: If the file is missing, is not a JSON object or names another command.
    '''

    try:
        conf = read_json(fp)
    except FileNotFoundError as e:
        raise ConfigError(field='config', msg=str(e)) from e
    except json.JSONDecodeError as e:
        raise ConfigError(field='config', msg=f'{fp}, line {e.lineno} column {e.colno}: {e.msg}') from e

    if not isinstance(conf, dict):
        raise ConfigError(field='config', msg=f'{fp} must contain a JSON object')

    file_command = conf.pop('command', command)
    if file_command != command:
        raise ConfigError(field='command', msg=f'Job file {fp} is for `{file_command}`, not `{command}`')

    return conf


def run(config: JobConfig, logger: Logger | None = None) -> LabMessage:
    '''
    Run the experiment of a validated configuration.

    :param config: Job configuration.
    :type config: JobConfig
    :param logger: Logger of the run, defaults to a `LoguruLogger` on the output directory.
    :type logger: Logger | None, optional
    :return: Message of the run, listing the written files.
    :rtype: LabMessage
    '''

    experiment = EXPERIMENTS[config.command].from_config(config, logger=logger)
    return experiment.run()


def main(argv: List[str] | None = None) -> int:
    '''
    Parse the command line, run the command and map errors to exit codes.

    :param argv: Arguments, defaults to `sys.argv[1:]`.
    :type argv: List[str] | None, optional
    :return: Exit status.
    :rtype: int
    '''

    logger = LoguruLogger(to_file=False)

    try:

        args    = vars(get_parser().parse_args(argv))
        command = args.pop('command')
        job_fp  = args.pop('config')

        file_conf = read_job_file(job_fp, command) if job_fp else {}
        config    = JobConfig.from_mapping(command, overwrite_dict(file_conf, args))

        msg = run(config)

    except NumericalContractError as e:
        logger.error(f'Numerical contract violated: {e}')
        return EXIT_NUMERICAL

    except (InnerlabError, ValueError) as e:
        logger.error(f'Invalid configuration: {e}')
        return EXIT_CONFIG

    for fp in msg.written.values():
        print(fp)

    return EXIT_OK


if __name__ == '__main__': sys.exit(main())
