"""Standard argument parsing routines for fockbath commands."""

import logging

import fockbath

from fockbath.errors import ConfigError

from fockbath.experiments import (load_config, default_workers,
                                  resolve_config)


def add_version_args(parser):
    """Adds a standard --version/-V incantation which prints the version number
    from fockbath.__version__."""
    parser.add_argument("--version", "-V", action="version",
                        version="%(prog)s {}".format(fockbath.__version__))


def add_verbosity_args(parser):
    """Add a repeatable --verbose/-v flag."""
    parser.add_argument("--verbose", "-v", action="count", default=0,
                        help="log progress (repeat for numerical detail)")


def get_log_level_from_args(parser, args):
    """To be used with add_verbosity_args.

    Returns
    -------
    int
        A :py:mod:`logging` level: WARNING by default, INFO for one -v and
        DEBUG for more.
    """
    if args.verbose >= 2:
        return logging.DEBUG
    elif args.verbose == 1:
        return logging.INFO
    else:
        return logging.WARNING


def add_config_args(parser):
    """Add arguments for specifying an experiment configuration."""
    config_group = parser.add_argument_group("experiment configuration")
    config_group.add_argument("--config", "-c", metavar="FILE",
                              help="JSON config file (or a manifest.json from "
                                   "a previous run) layered over the preset")
    config_group.add_argument("--param", "-p", action="append", default=[],
                              metavar="KEY=VALUE",
                              help="override one config value; VALUE is "
                                   "parsed as JSON where possible (may be "
                                   "repeated)")
    config_group.add_argument("--seed", "-s", type=int, metavar="S",
                              help="random seed (default: from the config)")
    config_group.add_argument("--dump-operator", action="store_true",
                              help="also write the Hamiltonian as "
                                   "operator.csv (row, col, value); small "
                                   "bases only")


def get_config_from_args(parser, args, experiment):
    """To be used with add_config_args.

    Load, layer and validate the configuration for ``experiment``. Config
    errors are reported through ``parser.error`` (exit status 2).

    Returns
    -------
    dict
        The resolved config.
    """
    file_config = None
    text = None
    params = list(args.param)
    if args.dump_operator:
        params.append("dump_operator=true")
    if args.config is not None:
        try:
            manifest_experiment, file_config, text = load_config(args.config)
        except ConfigError as e:
            parser.error("{}: {}".format(args.config, e))
        if (manifest_experiment is not None and
                manifest_experiment != experiment):
            parser.error("{} is a manifest for {}, not {}".format(
                args.config, manifest_experiment, experiment))

    try:
        return resolve_config(experiment, file_config, params, args.seed,
                              text)
    except ConfigError as e:
        if e.line is not None and args.config is not None:
            parser.error("{}: {}".format(args.config, e))
        parser.error(str(e))


def add_output_args(parser):
    """Add arguments controlling where and how results are written."""
    output_group = parser.add_argument_group("output options")
    output_group.add_argument("--out", "-o", metavar="DIR", default="results",
                              help="output directory (default: %(default)s)")
    output_group.add_argument("--plot", action="store_true",
                              help="also render SVG plots of each time series "
                                   "and histogram")
    output_group.add_argument("--workers", "-j", type=int, metavar="N",
                              help="worker threads/processes for ensembles "
                                   "and sweeps (default: $FOCKBATH_WORKERS "
                                   "or 1)")


def get_output_from_args(parser, args):
    """To be used with add_output_args.

    Returns
    -------
    (out_dir, plot, workers)
    """
    if args.workers is not None:
        if args.workers < 1:
            parser.error("--workers must be at least 1")
        workers = args.workers
    else:
        try:
            workers = default_workers()
        except ConfigError as e:
            parser.error(str(e))
    return (args.out, args.plot, workers)
