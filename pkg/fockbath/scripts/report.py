"""Markdown rendering of experiment results for the terminal."""

from collections import OrderedDict

from six import iteritems

import numpy as np


def heading(text, level=1):
	"""Render the supplied text as a heading.

	Parameters
	----------
	text : str
		The text to render as a heading
	level : int
		The heading level from 1 upward.
	"""
	if level == 1:
		return "{}\n{}\n".format(text, "="*len(text))
	elif level == 2:
		return "{}\n{}\n".format(text, "-"*len(text))
	else:
		return "{} {}\n".format("#"*level, text)


def format_cell(value):
	"""Short human-readable rendering of a summary value."""
	if value is None:
		return "-"
	if isinstance(value, (bool, np.bool_)):
		return "yes" if value else "no"
	if isinstance(value, (float, np.floating)):
		if not np.isfinite(value):
			return "-"
		return "{:.4g}".format(float(value))
	if isinstance(value, (list, tuple, np.ndarray)):
		return "[{}]".format(", ".join(format_cell(v) for v in value))
	return str(value)


def table(data):
	"""Render the supplied data as a table.

	Parameters
	----------
	data : [[object, ...], ...]
		Table data, a list of rows of values. Each row must be the same length.
		Values are formatted with :py:func:`format_cell`. The first row of data
		is presented as a header.
	"""
	if len(data) == 0:
		return "\n"

	data = [[format_cell(v) for v in row] for row in data]

	col_widths = [max(len(row[n]) for row in data)
	              for n in range(len(data[0]))]

	out = ""
	for row_num, row in enumerate(data):
		out += "| {} |\n".format(" | ".join(
			col.ljust(col_widths[col_num]) for col_num, col in enumerate(row)))

		# Underline the header row
		if row_num == 0:
			out += "| {} |\n".format(" | ".join("-"*w for w in col_widths))

	return out


def flatten(summary, prefix=""):
	"""Flatten nested dictionaries into (dotted.key, value) pairs.

	Lists of dictionaries (e.g. sweep rows) are skipped; they get their own
	table.
	"""
	out = []
	for key, value in iteritems(summary):
		name = "{}{}".format(prefix, key)
		if isinstance(value, dict):
			out.extend(flatten(value, name + "."))
		elif (isinstance(value, list) and value and
		      isinstance(value[0], dict)):
			continue
		else:
			out.append((name, value))
	return out


def summary_table(result):
	"""A two column table of every headline number in a run summary."""
	summary = OrderedDict((k, v) for k, v in iteritems(result.summary)
	                      if k != "experiment")
	return table([["quantity", "value"]] + [list(r) for r in flatten(summary)])


def sweep_table(result, columns):
	"""One row per sweep point."""
	rows = [[row.get(c) for c in columns] for row in result.summary["rows"]]
	return table([list(columns)] + rows)


def report(result, columns=None):
	"""The full markdown report of a :py:class:`~fockbath.experiments.RunResult`.
	"""
	out = heading("fockbath {}".format(result.experiment), 1)
	out += "\n"
	out += summary_table(result)
	if result.experiment == "sweep" and columns is not None:
		out += "\n"
		out += heading("Sweep points", 2)
		out += "\n"
		out += sweep_table(result, columns)
	out += "\n"
	out += heading("Outputs", 2)
	out += "\n"
	out += "Written to {}:\n\n".format(result.out_dir)
	for name in result.files:
		out += "* {}\n".format(name)
	return out
