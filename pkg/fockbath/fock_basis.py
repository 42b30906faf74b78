"""
Fixed-number bosonic Fock basis of the bath tensored with the two probe
states.

Bath kets are occupation tuples over the modes of
:py:func:`fockbath.modes.bath_modes`, enumerated in ascending lexicographic
order with the first mode (n_L^0) varying slowest. The combined index of a
bath ket ``i`` with the probe in well ``p`` is ``2*i + p``, so the probe is
the fastest-varying factor and the partial trace over the bath is a sum over
stride-2 pairs.

Ranking is closed-form: the number of kets preceding a given one is a sum of
binomial coefficients, so no lookup table is needed.
"""

from collections import namedtuple

import numpy as np

from scipy.special import comb

from fockbath.errors import FockbathError
from fockbath.modes import Well, bath_modes


class BasisTooLargeError(FockbathError):
	"""The combined dimension exceeds the configured cap."""
	pass


class ConstraintError(FockbathError, ValueError):
	"""A ket does not satisfy the basis's number constraint."""
	pass


# Default cap on the combined dimension D = 2 * D_bath.
DEFAULT_MAX_DIMENSION = 4000000


FockKet = namedtuple("FockKet", ["occupations", "probe"])
"""A combined basis ket: bath occupations (one per mode) and probe well."""


def count_kets(n_atoms, n_modes):
	"""Number of ways of placing n_atoms bosons in n_modes modes."""
	if n_atoms < 0:
		return 0
	return int(comb(n_atoms + n_modes - 1, n_modes - 1, exact=True))


def _compositions(n_atoms, n_modes):
	"""All occupation tuples in ascending lexicographic order."""
	if n_modes == 1:
		yield (n_atoms, )
		return
	for first in range(n_atoms + 1):
		for rest in _compositions(n_atoms - first, n_modes - 1):
			yield (first, ) + rest


class BasisIndex(object):
	"""The enumerated basis for ``n_atoms`` bath atoms in ``n_modes`` modes.

	Attributes
	----------
	kets : ndarray, shape (dim_bath, n_modes)
		Bath occupations, one row per bath ket, in rank order.
	dim_bath, dim : int
		Bath and combined (bath x probe) dimensions.
	"""

	def __init__(self, n_atoms, n_modes, max_dimension=DEFAULT_MAX_DIMENSION):
		if n_atoms < 1:
			raise ValueError("n_atoms must be at least 1")
		if n_modes not in (2, 4):
			raise ValueError("n_modes must be 2 or 4, not {}".format(n_modes))

		self.n_atoms = int(n_atoms)
		self.n_modes = int(n_modes)
		self.dim_bath = count_kets(n_atoms, n_modes)
		self.dim = 2 * self.dim_bath

		if self.dim > max_dimension:
			raise BasisTooLargeError(
				"{} atoms in {} modes gives dimension {} (cap {})".format(
					n_atoms, n_modes, self.dim, max_dimension))

		self.kets = np.array(list(_compositions(self.n_atoms, self.n_modes)),
		                     dtype=np.int64)
		self.kets.setflags(write=False)

		# _preceding[k, r] = number of kets whose modes k.. hold r atoms, i.e.
		# count_kets(r, n_modes - k)
		self._preceding = np.array(
			[[count_kets(r, self.n_modes - k) for r in range(self.n_atoms + 1)]
			 for k in range(self.n_modes)], dtype=np.int64)

	@property
	def bands(self):
		return self.n_modes // 2

	@property
	def modes(self):
		return bath_modes(self.bands)

	def check(self, occupations):
		"""Raise ConstraintError unless ``occupations`` is a valid bath ket."""
		occupations = tuple(occupations)
		if len(occupations) != self.n_modes:
			raise ConstraintError("expected {} occupations, got {}".format(
				self.n_modes, len(occupations)))
		if any(n < 0 for n in occupations):
			raise ConstraintError("negative occupation in {}".format(occupations))
		if sum(occupations) != self.n_atoms:
			raise ConstraintError(
				"occupations {} sum to {}, not {}".format(
					occupations, sum(occupations), self.n_atoms))

	def rank_bath(self, occupations):
		"""Index of a bath ket within the bath enumeration."""
		self.check(occupations)
		return int(self.rank_bath_many(np.asarray([occupations]))[0])

	def rank_bath_many(self, occupations):
		"""Vectorised rank of many bath kets (rows of ``occupations``).

		No constraint checking is performed.
		"""
		occupations = np.asarray(occupations, dtype=np.int64)
		remaining = np.full(len(occupations), self.n_atoms, dtype=np.int64)
		rank = np.zeros(len(occupations), dtype=np.int64)
		for k in range(self.n_modes - 1):
			n_k = occupations[:, k]
			# Kets with a smaller occupation of mode k come first
			rank += (self._preceding[k, remaining] -
			         self._preceding[k, remaining - n_k])
			remaining = remaining - n_k
		return rank

	def rank(self, ket):
		"""Combined index of a :py:class:`FockKet`."""
		return 2 * self.rank_bath(ket.occupations) + int(Well.from_label(ket.probe))

	def unrank(self, index):
		"""The :py:class:`FockKet` at combined index ``index``."""
		if not 0 <= index < self.dim:
			raise IndexError("index {} outside basis of dimension {}".format(
				index, self.dim))
		return FockKet(tuple(int(n) for n in self.kets[index // 2]),
		               Well(index % 2))

	def occupation(self, mode):
		"""Occupations of one mode (index or :py:class:`Mode`) for every bath
		ket."""
		if not isinstance(mode, (int, np.integer)):
			mode = self.modes.index(mode)
		return self.kets[:, mode]

	def describe(self):
		"""Metadata echoed into output headers."""
		return {
			"n_atoms": self.n_atoms,
			"n_modes": self.n_modes,
			"dim_bath": self.dim_bath,
			"dim": self.dim,
		}

	def __repr__(self):
		return "BasisIndex(n_atoms={}, n_modes={}, dim={})".format(
			self.n_atoms, self.n_modes, self.dim)


def enumerate_basis(n_atoms, n_modes, max_dimension=DEFAULT_MAX_DIMENSION):
	"""Build the :py:class:`BasisIndex` for ``n_atoms`` in ``n_modes`` modes."""
	return BasisIndex(n_atoms, n_modes, max_dimension)
