"""Uniformly sampled observable records and their CSV encoding."""

from collections import OrderedDict

from six import iteritems

import numpy as np


# Every CSV and JSON header carries this note
UNITS = "hbar=1, energies in hbar*omega0, times in 1/omega0"


class TimeSeries(object):
	"""A record of observables sampled at common times.

	Columns are float arrays of equal length keyed by name, kept in insertion
	order; the first column is always ``t``. Missing values (e.g. upper-band
	occupations in a single-band run) are NaN.

	Attributes
	----------
	metadata : dict
		Free-form description of the run that produced the series (copied into
		output headers).
	"""

	def __init__(self, columns, metadata=None):
		columns = OrderedDict(columns)
		if "t" not in columns:
			raise ValueError("a time series needs a 't' column")
		t = columns.pop("t")
		columns = OrderedDict([("t", t)] + list(iteritems(columns)))

		lengths = set(len(v) for v in columns.values())
		if len(lengths) > 1:
			raise ValueError("columns have differing lengths {}".format(
				sorted(lengths)))

		self._columns = OrderedDict(
			(name, np.asarray(values, dtype=float))
			for name, values in iteritems(columns))
		self.metadata = dict(metadata or {})

	@classmethod
	def from_rows(cls, names, rows, metadata=None):
		"""Build from a list of dicts (one per sample); absent keys become
		NaN."""
		columns = OrderedDict(
			(name, [row.get(name, np.nan) for row in rows]) for name in names)
		return cls(columns, metadata)

	@property
	def names(self):
		return list(self._columns)

	@property
	def t(self):
		return self._columns["t"]

	def __len__(self):
		return len(self.t)

	def __getitem__(self, name):
		return self._columns[name]

	def __contains__(self, name):
		return name in self._columns

	@property
	def sample_interval(self):
		"""Spacing between samples (the median, robust to a split final step)."""
		if len(self) < 2:
			return None
		return float(np.median(np.diff(self.t)))

	def window(self, t0=None, t1=None):
		"""Samples with t0 <= t <= t1 as a new series."""
		t = self.t
		mask = np.ones(len(t), dtype=bool)
		if t0 is not None:
			mask &= t >= t0 - 1e-9
		if t1 is not None:
			mask &= t <= t1 + 1e-9
		return TimeSeries(
			OrderedDict((name, values[mask])
			            for name, values in iteritems(self._columns)),
			self.metadata)

	def with_column(self, name, values):
		columns = OrderedDict(self._columns)
		columns[name] = values
		return TimeSeries(columns, self.metadata)

	def rows(self):
		"""Iterate over samples as dicts."""
		for i in range(len(self)):
			yield OrderedDict((name, values[i])
			                  for name, values in iteritems(self._columns))

	def __repr__(self):
		return "TimeSeries({} samples, columns={})".format(len(self), self.names)


def format_value(value):
	"""Fixed-precision text for a CSV cell; NaN and None become NA."""
	if value is None:
		return "NA"
	if isinstance(value, (bool, np.bool_)):
		return str(bool(value)).lower()
	if isinstance(value, (int, np.integer)):
		return str(int(value))
	if isinstance(value, (float, np.floating)):
		if np.isnan(value):
			return "NA"
		return "{:.10g}".format(float(value))
	return str(value)


class CSVWriter(object):
	"""Writes rows with a fixed, ordered set of columns.

	Output begins with ``#``-prefixed header lines (one ``key: value`` per
	entry of ``header``, followed by the units note) and a column-name line.
	Columns absent from a row are written as ``NA``.
	"""

	def __init__(self, file, columns, header=None):
		"""
		Parameters
		----------
		file : file-like
		columns : [str, ...]
			Column names in output order.
		header : dict or None
			Run description, written one ``# key: value`` line per entry in
			sorted key order.
		"""
		self.file = file
		self.columns = list(columns)

		for key, value in sorted(iteritems(header or {})):
			self.file.write("# {}: {}\n".format(key, value))
		self.file.write("# units: {}\n".format(UNITS))
		self.file.write("{}\n".format(",".join(self.columns)))

	def write_row(self, **columns):
		"""Write a row to the CSV."""
		assert set(columns) <= set(self.columns)
		self.file.write("{}\n".format(",".join(
			format_value(columns.get(c)) for c in self.columns)))


def write_series(file, series, header=None):
	"""Write a whole :py:class:`TimeSeries` as CSV."""
	writer = CSVWriter(file, series.names, header)
	for row in series.rows():
		writer.write_row(**row)


def read_series(file):
	"""Read a CSV written by :py:func:`write_series` back into a
	:py:class:`TimeSeries` (header lines become metadata)."""
	metadata = {}
	names = None
	rows = []
	for line in file:
		line = line.rstrip("\n")
		if not line:
			continue
		if line.startswith("#"):
			key, _, value = line[1:].partition(":")
			metadata[key.strip()] = value.strip()
		elif names is None:
			names = line.split(",")
		else:
			rows.append([np.nan if cell == "NA" else float(cell)
			             for cell in line.split(",")])
	if names is None:
		raise ValueError("no column header found")
	data = np.array(rows, dtype=float).reshape(len(rows), len(names))
	return TimeSeries(OrderedDict((name, data[:, i])
	                              for i, name in enumerate(names)), metadata)
