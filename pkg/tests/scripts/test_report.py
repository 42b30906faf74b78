import pytest

import numpy as np

from collections import OrderedDict

from fockbath.experiments import RunResult

from fockbath.scripts.report import (heading, table, format_cell, flatten,
                                     summary_table, report)


def test_heading():
	assert heading("Hi") ==\
		"Hi\n"\
		"==\n"
	assert heading("Hello, World!", level=2) ==\
		"Hello, World!\n"\
		"-------------\n"
	assert heading("Hello, World!", level=3) ==\
		"### Hello, World!\n"


def test_table():
	# Special case
	assert table([]) == "\n"

	assert table([["Hi", "There"]]) == (
		"| Hi | There |\n"
		"| -- | ----- |\n"
	)
	assert table([["Hi", "There"],
	              [123, 1.5],
	              ["", None]]) == (
		"| Hi  | There |\n"
		"| --- | ----- |\n"
		"| 123 | 1.5   |\n"
		"|     | -     |\n"
	)


@pytest.mark.parametrize("value,text", [(None, "-"),
                                        (np.nan, "-"),
                                        (True, "yes"),
                                        (np.bool_(False), "no"),
                                        (0.123456, "0.1235"),
                                        (12, "12"),
                                        ([1.0, None], "[1, -]"),
                                        ("nL0", "nL0")])
def test_format_cell(value, text):
	assert format_cell(value) == text


def test_flatten():
	summary = OrderedDict([
		("gamma", 0.02),
		("fits", OrderedDict([("purity", OrderedDict([("rate", 0.01)]))])),
		("rows", [{"value": 1}]),
		("window", [10.0, 20.0]),
	])
	assert flatten(summary) == [("gamma", 0.02),
	                            ("fits.purity.rate", 0.01),
	                            ("window", [10.0, 20.0])]


def test_report():
	result = RunResult("fig2", "/tmp/out",
	                   OrderedDict([("experiment", "fig2"), ("gamma", 0.0215)]),
	                   ["series.csv", "summary.json"])
	assert summary_table(result) == (
		"| quantity | value  |\n"
		"| -------- | ------ |\n"
		"| gamma    | 0.0215 |\n"
	)
	text = report(result)
	assert text.startswith("fockbath fig2\n=============\n")
	assert "Written to /tmp/out:" in text
	assert "* series.csv\n" in text
	assert "Sweep points" not in text


def test_sweep_report():
	summary = OrderedDict([("axis", "n_atoms"),
	                       ("rows", [OrderedDict([("value", 8),
	                                              ("gamma", 0.01)]),
	                                 OrderedDict([("value", 0),
	                                              ("error", "ValueError")])])])
	result = RunResult("sweep", "out", summary, [])
	text = report(result, ["value", "gamma", "error"])
	assert "Sweep points" in text
	assert "| 8     | 0.01  | -          |" in text
	assert "| 0     | -     | ValueError |" in text
