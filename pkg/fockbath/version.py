"""This file simply defines the current version number and nothing else."""
__version__="v1.0.0"
