"""
Named experiments: configuration, execution and output bundles.

An experiment is configured by a flat JSON object. Every experiment has a
preset dictionary in :py:data:`PRESETS`; a user file, ``key=value``
overrides and an explicit seed are layered on top, in that order, by
:py:func:`resolve_config`. :py:func:`run` executes an experiment and writes
its outputs (CSV tables, ``summary.json`` and a ``manifest.json`` that can be
fed back in as a config) into a directory, atomically: outputs are staged in
a temporary directory which is only moved into place if the run succeeds.
"""

import hashlib
import json
import logging
import os
import re
import shutil
import tempfile
import time

from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor

from six import iteritems

import numpy as np

from scipy.stats import linregress

from fockbath.version import __version__
from fockbath.chaos import (band_sectors, diagonal_ensemble, eigensolve_bath,
                            eigenstate_profile, energy_window,
                            histogram_columns, occupation_histogram,
                            offdiag_occupation_stats, profile_columns)
from fockbath.dynamics import Protocol, run_protocol
from fockbath.errors import ConfigError, FitError, FockbathError
from fockbath.fock_basis import DEFAULT_MAX_DIMENSION, count_kets
from fockbath.hamiltonian import (ModelSpec, build_bath_block, build_hamiltonian,
                                 build_interband)
from fockbath.modes import mode_from_label
from fockbath.observables import (decay_fits, default_window, find_revival,
                                  fit_exponential)
from fockbath.orbitals import (DEFAULT_PROBE_TRAP, PROBE_TRAPS, Grid1D,
                               HubbardParams, TrapPotential,
                               coupling_for_interaction, derive_parameters,
                               probe_tunneling_conventions)
from fockbath.presets import reference_params
from fockbath import presets
from fockbath.series import CSVWriter, UNITS, write_series
from fockbath.stochastic import (MeanFieldParams, NoiseSpec, dephasing_rate,
                                 mean_field_from_microscopic, noise_scale,
                                 simulate_dephasing)


# Environment variable giving the default worker count
WORKERS_ENV = "FOCKBATH_WORKERS"

# Bath ket the reference two-band run starts from, for 30 atoms
REFERENCE_KET = (16, 10, 0, 4)
REFERENCE_ATOMS = 30

# Largest combined dimension whose Hamiltonian may be dumped
MAX_DUMP_DIMENSION = 2000

# Aliases accepted in configs
ALIASES = {"N": "n_atoms"}


_MODEL = OrderedDict([
	("n_atoms", 30),
	("bands", 2),
	("j0", presets.J0),
	("j1", presets.J1),
	("e0", presets.E0),
	("e1", presets.E1),
	("u0_n", presets.U0_N),
	("u1_ratio", presets.U1_RATIO),
	("u01_ratio", presets.U01_RATIO),
	("g_i_n", presets.G_I_N),
	("j_s", presets.J_S),
])

_PROTOCOL = OrderedDict([
	# null selects the reference ket scaled to n_atoms
	("initial_bath", None),
	("initial_well", "L"),
	("t_switch", 100.0),
	("t_end", 600.0),
	("sample_dt", 0.1),
	("tolerance", 1e-10),
	("krylov_dim", 30),
	("dense_threshold", 2000),
	("method", "auto"),
	("max_dimension", DEFAULT_MAX_DIMENSION),
	# Write the full Hamiltonian as operator.csv (small bases only)
	("dump_operator", False),
])

_FIT = OrderedDict([
	# null: t_switch + 10 and t_end
	("fit_start", None),
	("fit_end", None),
	("final_window", 100.0),
	("revival_threshold", 0.8),
])

_HISTOGRAM = OrderedDict([
	# null: t_switch and t_end
	("hist_start", None),
	("hist_end", None),
	("min_samples", 200),
])


def _merge(*parts, **extra):
	out = OrderedDict([("seed", 0)])
	for part in parts:
		out.update(part)
	out.update(sorted(iteritems(extra)))
	return out


PRESETS = {
	"orbitals": _merge(OrderedDict([
		("barrier_height", 10.0),
		("barrier_width", 0.1),
		("x_min", -8.0),
		("x_max", 8.0),
		("n_points", 2048),
		("mass_ratio", presets.MASS_RATIO),
		("probe_trap", DEFAULT_PROBE_TRAP),
		("bands", 2),
		("g", 0.0),
		("g_i", 0.0),
		# If set, also report the g reproducing this U^0
		("u0", None),
	])),
	"fig2": _merge(_MODEL, _PROTOCOL, _FIT),
	"fig3": _merge(_MODEL, _PROTOCOL, _FIT, bands=1, u0_n=0.1, u01_ratio=0.0),
	"fig4": _merge(_MODEL, _PROTOCOL, _HISTOGRAM, n_atoms=12,
	               eigenstate_energy=None, window_states=100,
	               min_window_states=100, dense_cap=8000, stats_mode="nL0",
	               histograms=True),
	"fig5": _merge(_MODEL, _PROTOCOL, _FIT, _HISTOGRAM,
	               diagonal_ensemble=True, dense_cap=8000),
	"stochastic": _merge(OrderedDict([
		("sigma", 1.2e-3),
		("sigma_reading", "std"),
		("tau_c", None),
		("j_s_effective", presets.J_S - 0.5e-2),
		("eps0", 0.12),
		("ensemble", 10000),
		("t_end", 600.0),
		("dt", 0.1),
		("sample_every", 10),
		("noise_channels", "independent"),
		("fit_start", 10.0),
		("checkpoints", 10),
	])),
}
PRESETS["sweep"] = _merge(PRESETS["fig5"], axis="n_atoms",
                          values=[8, 10, 12, 16, 20], pr_cap=3000,
                          diagonal_ensemble=False)

# The experiment each command-line subcommand runs
SUBCOMMANDS = {
	"orbitals": "orbitals",
	"evolve": "fig2",
	"chaos": "fig4",
	"stochastic": "stochastic",
	"sweep": "sweep",
}


################################################################################
# Configuration
################################################################################

def _key_line(text, key):
	"""Line number (1-based) of ``"key":`` in a JSON document, or None."""
	if text is None:
		return None
	match = re.search(r'"{}"\s*:'.format(re.escape(key)), text)
	if match is None:
		return None
	return text.count("\n", 0, match.start()) + 1


def load_config_text(text):
	"""Parse a JSON config (or a manifest written by :py:func:`run`).

	Returns
	-------
	(experiment or None, {key: value})

	Raises
	------
	ConfigError
		With the offending line for syntax errors.
	"""
	try:
		data = json.loads(text, object_pairs_hook=OrderedDict)
	except ValueError as e:
		raise ConfigError("invalid JSON: {}".format(getattr(e, "msg", e)),
		                  getattr(e, "lineno", None))
	if not isinstance(data, dict):
		raise ConfigError("a config must be a JSON object", 1)

	# A manifest carries the resolved config under "config"
	if "config_hash" in data and isinstance(data.get("config"), dict):
		return data.get("experiment"), data["config"]
	return None, data


def load_config(filename):
	"""Read a config file; see :py:func:`load_config_text`.

	Returns
	-------
	(experiment or None, {key: value}, text)
	"""
	try:
		with open(filename, "r") as f:
			text = f.read()
	except (IOError, OSError) as e:
		raise ConfigError("cannot read config {}: {}".format(filename, e))
	experiment, config = load_config_text(text)
	return experiment, config, text


def parse_param(text):
	"""Parse a ``key=value`` override; values are JSON where possible."""
	key, sep, value = text.partition("=")
	key = key.strip()
	if not sep or not key:
		raise ConfigError("overrides must look like key=value, not '{}'".format(
			text))
	try:
		value = json.loads(value)
	except ValueError:
		value = value.strip()
	return key, value


def _is_number(value):
	return (isinstance(value, (int, float, np.integer, np.floating)) and
	        not isinstance(value, bool))


def _check_type(key, value, default, line=None):
	# Keys defaulting to null take a number, a list or null
	if default is None:
		return
	if isinstance(default, bool):
		ok = isinstance(value, bool)
	elif _is_number(default):
		ok = _is_number(value)
	elif isinstance(default, list):
		ok = isinstance(value, list)
	else:
		ok = isinstance(value, type(default))
	if not ok:
		raise ConfigError("'{}' should be {}, not {!r}".format(
			key, type(default).__name__, value), line)


def _apply(config, updates, experiment, text=None):
	preset = PRESETS[experiment]
	for key, value in iteritems(updates):
		name = ALIASES.get(key, key)
		line = _key_line(text, key)
		if name not in preset:
			raise ConfigError("unknown key '{}' for experiment {}".format(
				key, experiment), line)
		_check_type(name, value, preset[name], line)
		config[name] = value


def resolve_config(experiment, file_config=None, params=(), seed=None,
                   text=None):
	"""Layer a config file, overrides and a seed onto the preset.

	Parameters
	----------
	experiment : str
		A key of :py:data:`PRESETS`.
	file_config : dict or None
	params : ["key=value", ...]
	seed : int or None
	text : str or None
		Source of ``file_config`` (for line numbers in errors).

	Raises
	------
	ConfigError
	"""
	if experiment not in PRESETS:
		raise ConfigError("unknown experiment '{}'; expected one of {}".format(
			experiment, ", ".join(sorted(PRESETS))))

	config = OrderedDict(PRESETS[experiment])
	_apply(config, file_config or {}, experiment, text)
	_apply(config, OrderedDict(parse_param(p) for p in params), experiment)
	if seed is not None:
		config["seed"] = int(seed)

	validate_config(experiment, config)
	return config


def validate_config(experiment, config):
	"""Check values by building the objects the experiment will use."""
	try:
		if experiment == "orbitals":
			_potential_and_grid(config)
			if config["probe_trap"] not in PROBE_TRAPS:
				raise ValueError("probe_trap must be one of {}".format(
					", ".join(PROBE_TRAPS)))
			if config["mass_ratio"] <= 0:
				raise ValueError("mass_ratio must be positive")
		elif experiment == "stochastic":
			_noise(config)
			if config["checkpoints"] < 1:
				raise ValueError("checkpoints must be positive")
		else:
			spec = model_from_config(config, with_coupling=False)
			protocol_from_config(config, spec)
			dimension = 2 * count_kets(spec.n_atoms, spec.n_modes)
			if config.get("dump_operator") and dimension > MAX_DUMP_DIMENSION:
				raise ValueError(
					"dump_operator needs a dimension of at most {}, not {}".format(
						MAX_DUMP_DIMENSION, dimension))
		if experiment == "sweep":
			if config["axis"] not in PRESETS["fig5"] or \
			   not _is_number(PRESETS["fig5"][config["axis"]]):
				raise ValueError("sweep axis '{}' is not a numeric key".format(
					config["axis"]))
			if not config["values"] or \
			   not all(_is_number(v) for v in config["values"]):
				raise ValueError("sweep values must be a non-empty list of "
				                 "numbers")
		if experiment in ("fig4", "fig5", "sweep"):
			for key in ("stats_mode", ):
				if key in config:
					mode_from_label(config[key], config["bands"])
	except (ValueError, TypeError, KeyError) as e:
		raise ConfigError(str(e))


def config_hash(config):
	"""Short stable digest of a resolved config."""
	text = json.dumps(_jsonable(config), sort_keys=True)
	return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def default_workers():
	"""Worker count from the environment, else 1."""
	value = os.environ.get(WORKERS_ENV)
	if not value:
		return 1
	try:
		workers = int(value)
	except ValueError:
		raise ConfigError("{} must be an integer, not '{}'".format(WORKERS_ENV,
		                                                           value))
	if workers < 1:
		raise ConfigError("{} must be at least 1".format(WORKERS_ENV))
	return workers


################################################################################
# Building model objects from configs
################################################################################

def scaled_reference_ket(n_atoms, bands=2):
	"""The reference starting ket scaled to ``n_atoms`` (all atoms in the
	left well for a single band)."""
	if bands == 1:
		return (n_atoms, 0)
	ket = [int(np.floor(n * n_atoms / float(REFERENCE_ATOMS) + 0.5))
	       for n in REFERENCE_KET]
	# Put any rounding surplus or deficit on the most occupied mode
	biggest = int(np.argmax(ket))
	ket[biggest] += n_atoms - sum(ket)
	return tuple(ket)


def model_from_config(config, with_coupling=True):
	"""The :py:class:`fockbath.hamiltonian.ModelSpec` of a config."""
	n = config["n_atoms"]
	if not isinstance(n, int) or isinstance(n, bool) or n < 1:
		raise ValueError("n_atoms must be a positive integer")
	overrides = dict(j0=config["j0"], j1=config["j1"], e0=config["e0"],
	                 e1=config["e1"])
	scaling = dict(u0_n=config["u0_n"], u1_ratio=config["u1_ratio"],
	               u01_ratio=config["u01_ratio"], g_i_n=config["g_i_n"],
	               j_s=config["j_s"])
	if with_coupling:
		params = reference_params(n, **dict(scaling, **overrides))
	else:
		u0 = scaling["u0_n"] / float(n)
		params = HubbardParams(u0=u0, u1=scaling["u1_ratio"] * u0,
		                       u01=scaling["u01_ratio"] * u0, j_s=config["j_s"],
		                       g_i=scaling["g_i_n"] / float(n), **overrides)
	return ModelSpec(params, n, config["bands"],
	                 t_switch=config.get("t_switch", 0.0))


def initial_bath(config):
	if config["initial_bath"] is None:
		return scaled_reference_ket(config["n_atoms"], config["bands"])
	ket = tuple(config["initial_bath"])
	if len(ket) != 2 * config["bands"]:
		raise ValueError("initial_bath needs {} occupations".format(
			2 * config["bands"]))
	if sum(ket) != config["n_atoms"] or min(ket) < 0:
		raise ValueError("initial_bath {} does not place {} atoms".format(
			list(ket), config["n_atoms"]))
	return ket


def protocol_from_config(config, spec=None):
	return Protocol(initial_bath(config), config["initial_well"],
	                t_switch=config["t_switch"], t_end=config["t_end"],
	                sample_dt=config["sample_dt"],
	                tolerance=config["tolerance"],
	                krylov_dim=config["krylov_dim"],
	                dense_threshold=config["dense_threshold"],
	                method=config["method"])


def _potential_and_grid(config):
	potential = TrapPotential(config["barrier_height"], config["barrier_width"])
	grid = Grid1D(config["x_min"], config["x_max"], config["n_points"])
	return potential, grid


def _noise(config):
	sigma = noise_scale(config["sigma"], config["sigma_reading"])
	return NoiseSpec(sigma, config["tau_c"], config["seed"],
	                 config["ensemble"], config["noise_channels"])


################################################################################
# Output bundles
################################################################################

def _jsonable(value):
	"""Convert numpy types, tuples and NaN for JSON output."""
	if isinstance(value, dict):
		return OrderedDict((str(k), _jsonable(v)) for k, v in iteritems(value))
	if isinstance(value, (list, tuple)):
		return [_jsonable(v) for v in value]
	if isinstance(value, np.ndarray):
		return [_jsonable(v) for v in value.tolist()]
	if isinstance(value, (bool, np.bool_)):
		return bool(value)
	if isinstance(value, (int, np.integer)):
		return int(value)
	if isinstance(value, (float, np.floating)):
		value = float(value)
		return None if not np.isfinite(value) else value
	if isinstance(value, complex):
		return [value.real, value.imag]
	return value


class OutputBundle(object):
	"""Stages output files and moves them into ``out_dir`` on success.

	On an exception the staging directory is removed and nothing is written
	to ``out_dir``.
	"""

	def __init__(self, out_dir, header):
		self.out_dir = os.path.abspath(out_dir)
		self.header = header
		self.files = []
		self._staging = None

	def __enter__(self):
		parent = os.path.dirname(self.out_dir)
		if not os.path.isdir(parent):
			os.makedirs(parent)
		self._staging = tempfile.mkdtemp(prefix=".fockbath-", dir=parent)
		return self

	def __exit__(self, type, value, traceback):
		try:
			if type is None:
				if not os.path.isdir(self.out_dir):
					os.makedirs(self.out_dir)
				for name in self.files:
					target = os.path.join(self.out_dir, name)
					if not os.path.isdir(os.path.dirname(target)):
						os.makedirs(os.path.dirname(target))
					shutil.move(os.path.join(self._staging, name), target)
		finally:
			shutil.rmtree(self._staging, ignore_errors=True)
		return False

	def path(self, name):
		"""A staged path for ``name``; the file is moved into place on
		success."""
		if name not in self.files:
			self.files.append(name)
		path = os.path.join(self._staging, name)
		if not os.path.isdir(os.path.dirname(path)):
			os.makedirs(os.path.dirname(path))
		return path

	def write_series(self, name, series):
		with open(self.path(name), "w") as f:
			write_series(f, series, self.header)

	def write_table(self, name, columns):
		"""Write equal-length columns, given as (name, values) pairs."""
		columns = OrderedDict(columns)
		writer = None
		with open(self.path(name), "w") as f:
			writer = CSVWriter(f, list(columns), self.header)
			for row in zip(*columns.values()):
				writer.write_row(**dict(zip(columns, row)))

	def write_json(self, name, data):
		with open(self.path(name), "w") as f:
			json.dump(_jsonable(data), f, indent=2, sort_keys=True)
			f.write("\n")


class RunResult(object):
	"""What a run produced.

	Attributes
	----------
	experiment : str
	out_dir : str
	summary : dict
		Headline numbers (also in ``summary.json``).
	files : [str, ...]
		Written files, relative to ``out_dir``.
	series : {name: TimeSeries}
		Time series for plotting.
	histograms : {label: GaussianFit}
	"""

	def __init__(self, experiment, out_dir, summary, files, series=None,
	             histograms=None):
		self.experiment = experiment
		self.out_dir = out_dir
		self.summary = summary
		self.files = files
		self.series = series or {}
		self.histograms = histograms or {}


################################################################################
# Experiments
################################################################################

def _run_orbitals(config, bundle, workers):
	potential, grid = _potential_and_grid(config)
	orbitals, params = derive_parameters(
		potential, grid, mass_ratio=config["mass_ratio"], g=config["g"],
		g_i=config["g_i"], probe_trap=config["probe_trap"],
		bands=config["bands"])

	summary = OrderedDict()
	summary["params"] = params.to_dict()
	summary["j_s_conventions"] = probe_tunneling_conventions(
		potential, grid, config["mass_ratio"])
	if config["u0"] is not None:
		summary["g_for_u0"] = coupling_for_interaction(orbitals, config["u0"])

	bundle.write_json("params.json", summary["params"])
	bundle.write_table("orbitals.csv", orbitals.columns())
	return summary, {}, {}


def _segment_drift(series, t_switch):
	"""Largest relative energy change within each constant-H segment."""
	energy = series["energy"]
	t = series.t
	drift = 0.0
	for mask in (t < t_switch, t >= t_switch):
		if np.count_nonzero(mask) > 1:
			segment = energy[mask]
			scale = max(abs(segment[0]), 1e-300)
			drift = max(drift, np.max(np.abs(segment - segment[0])) / scale)
	return drift


def _fit_window(config):
	start, end = default_window(config["t_switch"], config["t_end"])
	if config.get("fit_start") is not None:
		start = config["fit_start"]
	if config.get("fit_end") is not None:
		end = config["fit_end"]
	return (start, end)


def _histogram_window(config):
	start = config["t_switch"] if config["hist_start"] is None \
		else config["hist_start"]
	end = config["t_end"] if config["hist_end"] is None else config["hist_end"]
	return (start, end)


def _protocol_run(config, bundle):
	"""Run the switch-on protocol; writes series.csv.

	Returns (spec, basis, series, summary).
	"""
	spec = model_from_config(config)
	protocol = protocol_from_config(config, spec)
	basis = spec.basis(max_dimension=config["max_dimension"])
	series = run_protocol(spec, protocol, basis)
	bundle.write_series("series.csv", series)
	if config["dump_operator"]:
		with open(bundle.path("operator.csv"), "w") as f:
			build_hamiltonian(spec, basis).dump_csv(f, bundle.header)

	summary = OrderedDict()
	summary["basis"] = basis.describe()
	summary["initial_bath"] = list(protocol.initial_bath)
	summary["max_norm_drift"] = series.metadata["max_norm_drift"]
	summary["max_upper_band_weight"] = \
		series.metadata["max_upper_band_weight"]
	summary["max_energy_drift"] = _segment_drift(series, protocol.t_switch)
	return spec, basis, series, summary


def _run_evolve(config, bundle, workers):
	spec, basis, series, summary = _protocol_run(config, bundle)

	window = _fit_window(config)
	if window[1] > window[0]:
		fits = decay_fits(series, window)
		summary["fits"] = fits
		summary["gamma"] = fits["purity_excess"].get("rate")
	final = series.window(config["t_end"] - config["final_window"])
	summary["final_purity_mean"] = float(np.mean(final["purity"]))
	summary["revival"] = find_revival(series, config["t_switch"],
	                                  config["revival_threshold"])._asdict()
	return summary, {"series": series}, {}


def _histograms(config, series, bundle, modes):
	fits = OrderedDict()
	for mode in modes:
		fit = occupation_histogram(series, mode, _histogram_window(config),
		                           config["min_samples"])
		fits[mode.label] = fit
		bundle.write_table("histogram_{}.csv".format(mode.label),
		                   histogram_columns(fit).items())
	return fits


def _run_chaos(config, bundle, workers):
	spec = model_from_config(config, with_coupling=False)
	basis = spec.basis(max_dimension=config["max_dimension"])
	mode = mode_from_label(config["stats_mode"], spec.bands)

	decomposition = eigensolve_bath(build_bath_block(spec, basis),
	                                cap=config["dense_cap"])
	reference_spec = spec.replace(params=spec.params.replace(u01=0.0))
	reference = eigensolve_bath(build_bath_block(reference_spec, basis),
	                            sectors=band_sectors(basis),
	                            cap=config["dense_cap"])

	ket = initial_bath(config)
	energy = config["eigenstate_energy"]
	if energy is None:
		energy = float(decomposition.diagonal[basis.rank_bath(ket)])

	summary = OrderedDict()
	summary["basis"] = basis.describe()
	summary["energy"] = energy
	for name, decomp in (("coupled", decomposition), ("reference", reference)):
		profile = eigenstate_profile(decomp, energy=energy)
		filename = "eigenprofile.csv" if name == "coupled" \
			else "eigenprofile_reference.csv"
		bundle.write_table(filename, profile_columns(profile).items())
		window = energy_window(decomp, energy, config["window_states"])
		stats = offdiag_occupation_stats(
			decomp, basis, mode, window,
			reference_energies=reference.energies,
			interband=build_interband(spec, basis),
			min_states=config["min_window_states"])
		summary[name] = OrderedDict([
			("eigenstate", profile.index),
			("eigenvalue", profile.energy),
			("participation_ratio", profile.participation_ratio),
			("energy_width", profile.energy_width),
			("offdiag", stats._asdict()),
		])
	summary["participation_ratio_gain"] = (
		summary["coupled"]["participation_ratio"] /
		summary["reference"]["participation_ratio"])
	bundle.write_json("statistics.json", summary)

	series = {}
	histograms = {}
	if config["histograms"]:
		spec = model_from_config(config)
		protocol = protocol_from_config(config, spec)
		run = run_protocol(spec, protocol, basis)
		bundle.write_series("series.csv", run)
		histograms = _histograms(config, run, bundle, basis.modes)
		summary["histograms"] = OrderedDict(
			(label, fit.to_dict()) for label, fit in iteritems(histograms))
		series["series"] = run
	return summary, series, histograms


def _run_fig5(config, bundle, workers):
	spec, basis, series, summary = _protocol_run(config, bundle)

	window = _fit_window(config)
	if window[1] > window[0]:
		try:
			fit = fit_exponential(series, window)
			summary["gamma"] = fit.rate
			summary["gamma_r_squared"] = fit.r_squared
		except FitError as e:
			summary["gamma"] = None
			summary["gamma_error"] = str(e)

	histograms = _histograms(config, series, bundle, basis.modes)
	summary["histograms"] = OrderedDict(
		(label, fit.to_dict()) for label, fit in iteritems(histograms))

	means = {label: fit.mean for label, fit in iteritems(histograms)}
	summary["left_right_difference"] = OrderedDict(
		("band{}".format(band),
		 means["nL{}".format(band)] - means["nR{}".format(band)])
		for band in range(spec.bands))

	mf = mean_field_from_microscopic(spec.params.coupling, spec.params.g_i,
	                                 histograms, spec.params.j_s,
	                                 n_atoms=spec.n_atoms, bands=spec.bands)
	summary["mean_field"] = mf.to_dict()
	sigma = float(np.sqrt(mf.var_eps))
	if sigma > 0.0:
		noise = NoiseSpec(sigma)
		summary["mean_field"]["predicted_rate"] = dephasing_rate(noise)

	if config["diagonal_ensemble"] and basis.dim_bath <= config["dense_cap"]:
		decomposition = eigensolve_bath(build_bath_block(spec, basis),
		                                cap=config["dense_cap"])
		bath_vector = np.zeros(basis.dim_bath)
		bath_vector[basis.rank_bath(initial_bath(config))] = 1.0
		predicted = diagonal_ensemble(decomposition, basis, bath_vector)
		summary["diagonal_ensemble"] = OrderedDict(
			(label, OrderedDict([("predicted", predicted[label]),
			                     ("time_average", means[label])]))
			for label in sorted(predicted))
	return summary, {"series": series}, histograms


def _run_stochastic(config, bundle, workers):
	noise = _noise(config)
	mf = MeanFieldParams(0.0, config["eps0"], config["eps0"], 0.0, 0.0, 0.0,
	                     config["j_s_effective"])
	series = simulate_dephasing(mf, noise, config["t_end"], config["dt"],
	                            config["sample_every"], workers)
	bundle.write_series("stochastic.csv", series)

	summary = OrderedDict()
	summary["noise"] = noise.describe()
	# 2P - 1 decays as exp(-Theta), the P_L envelope as exp(-Theta/2)
	summary["theta_slope"] = dephasing_rate(noise)
	summary["amplitude_rate"] = 0.5 * dephasing_rate(noise)
	try:
		fit = fit_exponential(series, (config["fit_start"], config["t_end"]))
		summary["gamma"] = fit.rate
		summary["gamma_r_squared"] = fit.r_squared
	except FitError as e:
		summary["gamma"] = None
		summary["gamma_error"] = str(e)

	# Agreement of the Monte Carlo phase factor with exp(-Theta/4)
	picks = np.unique(np.linspace(1, len(series) - 1,
	                              config["checkpoints"]).astype(int))
	error = series["offdiag_abs"][picks] - series["offdiag_predicted"][picks]
	stderr = np.maximum(series["offdiag_stderr"][picks], 1e-300)
	summary["checkpoints"] = OrderedDict([
		("t", series.t[picks]),
		("z", error / stderr),
	])
	summary["max_abs_z"] = float(np.max(np.abs(error / stderr)))
	return summary, {"stochastic": series}, {}


def _power_law(x, y):
	x = np.asarray(x, dtype=float)
	y = np.asarray(y, dtype=float)
	mask = np.isfinite(x) & np.isfinite(y) & (x > 0) & (y > 0)
	if np.count_nonzero(mask) < 2:
		return None
	return float(linregress(np.log(x[mask]), np.log(y[mask])).slope)


# Columns of sweep.csv; wall times vary between runs so they only go into
# summary.json and the printed report
SWEEP_COLUMNS = ["value", "gamma", "gamma_r_squared", "width", "pr", "error"]
SWEEP_REPORT_COLUMNS = SWEEP_COLUMNS[:-1] + ["wall_time", "error"]

# Keys that configure the sweep itself rather than a point
_SWEEP_KEYS = ("axis", "values", "pr_cap")


def _sweep_point(task):
	"""Run one sweep point into its own directory; returns its row."""
	axis, value, config, pr_cap, out_dir = task
	start = time.time()
	row = OrderedDict([("value", value)])
	try:
		result = run("fig5", config, out_dir)
		spec = model_from_config(config, with_coupling=False)
		row["gamma"] = result.summary.get("gamma")
		row["gamma_r_squared"] = result.summary.get("gamma_r_squared")
		row["width"] = result.summary["histograms"]["nL0"]["std"]

		basis = spec.basis()
		if basis.dim_bath <= pr_cap:
			decomposition = eigensolve_bath(build_bath_block(spec, basis),
			                                cap=pr_cap)
			energy = decomposition.diagonal[basis.rank_bath(initial_bath(config))]
			row["pr"] = eigenstate_profile(decomposition,
			                               energy=energy).participation_ratio
	except (FockbathError, ValueError, ArithmeticError) as e:
		logging.warning("Sweep point {}={} failed: {}".format(axis, value, e))
		row["error"] = "{}: {}".format(type(e).__name__, e)
	row["wall_time"] = time.time() - start
	return row


def sweep(config, out_dir, workers=1):
	"""Run the fig5 analysis at every value of ``config["axis"]``.

	Each point writes into ``points/<index>_<value>``; a failing point is
	recorded in its row and the sweep continues.

	Returns
	-------
	:py:class:`RunResult`
	"""
	axis = config["axis"]
	base = OrderedDict((k, v) for k, v in iteritems(config)
	                   if k not in _SWEEP_KEYS)

	header = _header("sweep", config)
	with OutputBundle(out_dir, header) as bundle:
		_write_manifest(bundle, "sweep", config)
		# Point directories are created by the points themselves, next to the
		# staged files, and moved into place with them
		tasks = []
		for index, value in enumerate(config["values"]):
			point = OrderedDict(base)
			point[axis] = int(value) if axis == "n_atoms" else value
			tasks.append((axis, value, point, config["pr_cap"], os.path.join(
				bundle._staging, "points", "{:02d}_{}".format(index, value))))

		logging.info("Sweeping {} over {} with {} workers".format(
			axis, config["values"], workers))
		if workers > 1:
			with ProcessPoolExecutor(max_workers=workers) as executor:
				rows = list(executor.map(_sweep_point, tasks))
		else:
			rows = [_sweep_point(task) for task in tasks]

		for _, _, _, _, point_dir in tasks:
			if os.path.isdir(point_dir):
				for name in sorted(os.listdir(point_dir)):
					bundle.files.append(os.path.relpath(
						os.path.join(point_dir, name), bundle._staging))

		with open(bundle.path("sweep.csv"), "w") as f:
			writer = CSVWriter(f, SWEEP_COLUMNS, header)
			for row in rows:
				writer.write_row(**OrderedDict(
					(k, v) for k, v in iteritems(row) if k in SWEEP_COLUMNS))

		values = [row["value"] for row in rows]
		summary = OrderedDict()
		summary["axis"] = axis
		summary["rows"] = rows
		summary["width_exponent"] = _power_law(
			values, [row.get("width", np.nan) for row in rows])
		summary["gamma_exponent"] = _power_law(
			values, [row.get("gamma") if row.get("gamma") is not None
			         else np.nan for row in rows])
		bundle.write_json("summary.json", summary)
		files = list(bundle.files)
	return RunResult("sweep", os.path.abspath(out_dir), summary, files)


_RUNNERS = {
	"orbitals": _run_orbitals,
	"fig2": _run_evolve,
	"fig3": _run_evolve,
	"fig4": _run_chaos,
	"fig5": _run_fig5,
	"stochastic": _run_stochastic,
}


def _header(experiment, config):
	return OrderedDict([
		("experiment", experiment),
		("config_hash", config_hash(config)),
		("seed", config["seed"]),
		("version", __version__),
	])


def _write_manifest(bundle, experiment, config):
	bundle.write_json("manifest.json", OrderedDict([
		("experiment", experiment),
		("config", config),
		("config_hash", config_hash(config)),
		("seed", config["seed"]),
		("version", __version__),
		("units", UNITS),
	]))


def run(experiment, config, out_dir, workers=1):
	"""Run an experiment with a resolved config and write its outputs.

	Parameters
	----------
	experiment : str
		A key of :py:data:`PRESETS`.
	config : dict
		From :py:func:`resolve_config`.
	out_dir : str
	workers : int
		Threads (stochastic ensembles) or processes (sweeps).

	Returns
	-------
	:py:class:`RunResult`

	Raises
	------
	ConfigError, NumericalError
		Nothing is left in ``out_dir`` by a failed run.
	"""
	if experiment == "sweep":
		return sweep(config, out_dir, workers)

	start = time.time()
	logging.info("Running {} into {}".format(experiment, out_dir))
	with OutputBundle(out_dir, _header(experiment, config)) as bundle:
		_write_manifest(bundle, experiment, config)
		summary, series, histograms = _RUNNERS[experiment](config, bundle,
		                                                   workers)
		summary["experiment"] = experiment
		summary["wall_time"] = time.time() - start
		bundle.write_json("summary.json", summary)
		files = list(bundle.files)
	return RunResult(experiment, os.path.abspath(out_dir), summary, files,
	                 series, histograms)
