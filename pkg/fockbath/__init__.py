from fockbath.version import __version__
