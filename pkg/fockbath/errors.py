"""Exceptions raised by fockbath.

Everything derives from :py:class:`FockbathError`. The command line tools map
:py:class:`ConfigError` onto exit code 2 and :py:class:`NumericalError` onto
exit code 3.
"""


class FockbathError(Exception):
	"""Base class of all fockbath errors."""
	pass


class ConfigError(FockbathError):
	"""A user-supplied configuration is invalid."""
	
	def __init__(self, message, line=None):
		if line is not None:
			message = "line {}: {}".format(line, message)
		FockbathError.__init__(self, message)
		self.line = line


class NumericalError(FockbathError):
	"""A numerical procedure failed to reach the requested accuracy."""
	pass


class FitError(NumericalError):
	"""A fit could not be performed on the data supplied."""
	pass
