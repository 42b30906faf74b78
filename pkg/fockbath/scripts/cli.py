#!/usr/bin/env python

"""
Run fockbath experiments from the command line.

Each subcommand runs one named experiment, layering ``--config``,
``--param`` and ``--seed`` over the experiment's preset, writes CSV/JSON
outputs (and, with ``--plot``, SVG plots) into ``--out`` and prints a
Markdown summary. The exit status is 0 on success, 2 for configuration
errors and 3 when a numerical method fails.
"""

import argparse

import logging

import os

import sys

from six import iteritems

from fockbath.scripts import arguments

from fockbath.scripts.contexts import SVGContextManager

from fockbath.scripts.report import report

from fockbath.diagrams.plots import histogram_plot, series_plot

from fockbath.errors import ConfigError, NumericalError

from fockbath.experiments import (PRESETS, SUBCOMMANDS, SWEEP_REPORT_COLUMNS,
                                  run)

from fockbath.fock_basis import BasisTooLargeError


# Size of rendered plots (points)
PLOT_WIDTH = 480
PLOT_HEIGHT = 320

# Columns drawn for each kind of time series: {series: [(suffix, columns)]}
PLOT_COLUMNS = {
	"series": [
		("occupations", ["nL0", "nL1", "nR0", "nR1"]),
		("probe", ["pL", "purity"]),
	],
	"stochastic": [
		("probe", ["pL_mean", "purity"]),
		("coherence", ["offdiag_abs", "offdiag_predicted", "coherence_abs"]),
	],
}

_DESCRIPTIONS = {
	"orbitals": "Solve the double-well orbitals and derive Hubbard parameters.",
	"evolve": "Switch on the probe-bath coupling and follow the probe's "
	          "decoherence.",
	"chaos": "Diagonalize the bath and report eigenstate chaos diagnostics.",
	"stochastic": "Simulate the probe under Ornstein-Uhlenbeck level noise.",
	"sweep": "Repeat the thermalization analysis over a parameter axis.",
	"run": "Run any named experiment preset.",
}


def write_plots(result, width=PLOT_WIDTH, height=PLOT_HEIGHT):
	"""Render SVG plots of a run's series and histograms into its output
	directory.

	Returns
	-------
	[filename, ...]
	"""
	written = []
	for name, series in sorted(iteritems(result.series)):
		for suffix, columns in PLOT_COLUMNS.get(name, [("all", series.names[1:])]):
			filename = "{}_{}.svg".format(name, suffix)
			plot = series_plot(series, columns,
			                   "{} {}".format(result.experiment, suffix))
			with SVGContextManager(os.path.join(result.out_dir, filename),
			                       width, height) as ctx:
				plot.draw(ctx, width, height)
			written.append(filename)
	for label, fit in sorted(iteritems(result.histograms)):
		filename = "histogram_{}.svg".format(label)
		plot = histogram_plot(fit, "{} occupation".format(label))
		with SVGContextManager(os.path.join(result.out_dir, filename),
		                       width, height) as ctx:
			plot.draw(ctx, width, height)
		written.append(filename)
	return written


def build_parser():
	parser = argparse.ArgumentParser(
		prog="fockbath",
		description="Simulate a two-level probe coupled to a finite bosonic "
		            "heat bath.")
	arguments.add_version_args(parser)

	subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
	subparsers.required = True
	for command in ("orbitals", "evolve", "chaos", "stochastic", "sweep",
	                "run"):
		subparser = subparsers.add_parser(command,
		                                  help=_DESCRIPTIONS[command],
		                                  description=_DESCRIPTIONS[command])
		if command == "run":
			subparser.add_argument("experiment", choices=sorted(PRESETS),
			                       help="the experiment preset to run")
		arguments.add_config_args(subparser)
		arguments.add_output_args(subparser)
		arguments.add_verbosity_args(subparser)
	return parser


def main(args=None):
	parser = build_parser()

	# Process command-line arguments
	args = parser.parse_args(args)
	experiment = getattr(args, "experiment", None) or SUBCOMMANDS[args.command]

	logging.basicConfig(level=arguments.get_log_level_from_args(parser, args))

	config = arguments.get_config_from_args(parser, args, experiment)
	out_dir, plot, workers = arguments.get_output_from_args(parser, args)

	try:
		result = run(experiment, config, out_dir, workers)
	except (ConfigError, BasisTooLargeError, ValueError) as e:
		parser.error(str(e))
	except NumericalError as e:
		sys.stderr.write("fockbath: numerical failure: {}: {}\n".format(
			type(e).__name__, e))
		return 3

	if plot:
		result.files.extend(write_plots(result))

	print(report(result, SWEEP_REPORT_COLUMNS))

	return 0


if __name__=="__main__":  # pragma: no cover
	sys.exit(main())
