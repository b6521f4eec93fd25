'''
This module contains the implementation of the Logger class, which is responsible for
	- logging in the three channels INFO, WARN and ERROR;
	- organize the target directory for saving results.

The Logger class is a base class that can be extended to implement different logging strategies.
The following are the implemented classes:
- Logger: Base class for logging that uses the Python `logging` module.
- LoguruLogger: Logger using `loguru` technology to log both on terminal and file.
- SilentLogger: Trivial logger with for non-logging.
'''

from __future__ import annotations

import logging
import os

import loguru
from rich.console import Console


class Logger():
	'''
	Class responsible for
		- logging in the channels info, warn and error;
		- organize foldering for saving results.
	'''

	# Rich console progress bar
	CONSOLE = Console(color_system=None, stderr=False)

	def __init__(self, path: str = '.') -> None:
		'''
		Initialize the logger with a possible specific target directory.

		:param path: Path where to save the experiment results.
		:type path: str
		'''

		self._dir: str = path

	# --- LOGGING ---

	# NOTE: The public logging methods pass the message to their private version
	#       for the actual logging.
	#	    Subclasses that intend to log with other strategies and technologies should
	#       override the private ones.

	def  info(self,  msg: str): self._info(msg=msg)
	def _info(self,  msg: str): logging.info(msg=msg)

	def  warn(self,  msg: str): self._warn(msg=msg)
	def _warn(self,  msg: str): logging.warning(msg=msg)

	def  error(self, msg: str): self._error(msg=msg)
	def _error(self, msg: str): logging.error(msg=msg)

	def close(self):
		'''
		Function including generic operations when the logger is no more intended to be used,
		such as releasing resources. The default version does nothing.
		'''
		pass

	def set_progress_bar(self):
		'''
		Logger setup for progress bar, so that log lines and the rich
		progress bar share the same console.

		NOTE: Currently only supported for `LoguruLogger` class
		'''

		if isinstance(self, LoguruLogger) and not hasattr(self, '_handler'):

			# Remove the default 'stderr' handler only, the file handler is kept
			try:
				self._logger.remove(0)
			except ValueError:
				pass

			self._handler = self._logger.add(lambda m: self.CONSOLE.print(m, end=""), colorize=True)

	# --- DIRECTORY ---

	def create_dir(self):
		''' Creates the experiment directory '''

		self.info(f"Creating output directory {self.dir}")
		os.makedirs(self.dir, exist_ok=True)

	@property
	def dir(self) -> str: return self._dir
	''' Returns experiment target directory for saving results. '''


class LoguruLogger(Logger):
	'''
	Logger using `loguru` technology to log both on terminal and file
	'''

	# NOTE: Loguru technology doesn't provide multiple-logger instances.
	#       For this reason we have a factory-id unique to any instance of
	#       the logger which is bind to the logger object.
	#       This allows to specify a filtering lambda to each file by
	#       checking the unique logger-id.
	_factory_id = 0

	LOG_FILE = 'info.log'

	def __init__(self, path: str = '.', to_file: bool = True) -> None:
		'''
		Initialize the logger with a possible specific target directory.
		In the case `to_file` flag is active, it logs on file.

		:param path: Path where to save the experiment results.
		:type path: str
		:param to_file: If to log on file, defaults to True.
		:type to_file: bool, optional
		'''

		# Assign the unique ID
		self._id = self._factory_id
		LoguruLogger._factory_id += 1

		# Initialize logger with unique ID
		self._logger = loguru.logger.bind(id=self._id)

		super().__init__(path=path)

		self._to_file = to_file

	def create_dir(self):
		'''
		Creates the experiment directory and, if requested,
		attaches the file handler bound to the unique ID.
		'''

		super().create_dir()

		if self._to_file and not hasattr(self, '_file_handler'):

			log_file = os.path.join(self.dir, self.LOG_FILE)
			self._file_handler = self._logger.add(
				log_file, level=0, enqueue=True,
				filter=lambda x: x['extra'].get('id') == self._id
			)

	# Overriding logging methods with `loguru` specific ones
	def _info (self, msg: str): self._logger.info   (msg)
	def _warn (self, msg: str): self._logger.warning(msg)
	def _error(self, msg: str): self._logger.error  (msg)

	def close(self):
		'''
		Close the logger releasing resources.
		It removes the logger handles to free their references.
		'''

		super().close()

		for handler in ('_file_handler', '_handler'):
			if hasattr(self, handler):
				self._logger.remove(handler_id=getattr(self, handler))
				delattr(self, handler)


class SilentLogger(Logger):
	''' Trivial logger with for non-logging '''

	def __init__(self, path: str = '.') -> None:
		'''
		Initialize the logger

		NOTE: `path` input parameter is used only for the output directory.
		'''
		super().__init__(path=path)

	# Override for no logging
	def _info (self, msg: str): pass
	def _warn (self, msg: str): pass
	def _error(self, msg: str): pass
