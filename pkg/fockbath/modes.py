"""
Names for the wells and single-particle modes of the double well.

Bath modes are ordered well-major, band-minor: (L,0), (L,1), (R,0), (R,1) in
two-band runs and (L,0), (R,0) in single-band runs. This order is the order of
the occupation tuples used everywhere else in fockbath.
"""

from collections import namedtuple

from enum import IntEnum


class Well(IntEnum):
	left  = 0
	right = 1
	
	@property
	def opposite(self):
		"""
		Returns the other well.
		"""
		return Well(1 - self)
	
	@property
	def label(self):
		"""
		Single-letter label, "L" or "R".
		"""
		return "LR"[self]
	
	@classmethod
	def from_label(cls, label):
		"""
		Accepts "L", "R", "left", "right" (any case) or 0/1.
		"""
		if isinstance(label, int):
			return cls(label)
		key = str(label).strip().lower()
		for well in cls:
			if key in (well.name, well.label.lower()):
				return well
		raise ValueError("unknown well '{}'".format(label))


_ModeTuple = namedtuple("_ModeTuple", ["well", "band"])


class Mode(_ModeTuple):
	"""A bath mode: an energy level (band) in one of the wells."""
	
	@property
	def label(self):
		"""
		Column-style label, e.g. "nL0".
		"""
		return "n{}{}".format(Well(self.well).label, self.band)


def bath_modes(bands):
	"""
	The ordered list of bath modes for a one- or two-band model.
	"""
	if bands not in (1, 2):
		raise ValueError("bands must be 1 or 2, not {}".format(bands))
	return [Mode(well, band) for well in Well for band in range(bands)]


def mode_from_label(label, bands=2):
	"""
	Look up a mode from its label ("nL0", "L0" or a (well, band) pair).
	"""
	if isinstance(label, (tuple, list)):
		well, band = label
		mode = Mode(Well.from_label(well), int(band))
	else:
		text = str(label).strip()
		if text.startswith("n"):
			text = text[1:]
		if len(text) != 2 or not text[1].isdigit():
			raise ValueError("unknown level '{}'".format(label))
		mode = Mode(Well.from_label(text[0]), int(text[1]))
	if mode not in bath_modes(bands):
		raise ValueError("level {} does not exist in a {}-band model".format(
			label, bands))
	return mode
