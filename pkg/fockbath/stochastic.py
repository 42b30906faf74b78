"""
Mean-field picture of the probe: a two-level system whose levels are shifted
by Gaussian, exponentially correlated noise induced by the bath.

The noise delta_eps(t) is an Ornstein-Uhlenbeck process with correlation
sigma^2 exp(-2|t' - t''| / tau_c), generated with the exact discrete update.
Each tunnelling eigenlevel of the probe accumulates a random phase
X(t) = int_0^t delta_eps; with independent noise on the two levels the
relative phase has variance Theta(t) and coherences decay as exp(-Theta/2).

Random numbers come from a Philox counter-based generator. Trajectories are
simulated in fixed-size chunks; chunk ``k`` draws from the stream seeded by
``SeedSequence(seed, spawn_key=(k,))``, so an ensemble is reproducible bit
for bit whatever the number of worker threads.
"""

import logging

from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from fockbath.errors import FockbathError, NumericalError
from fockbath.modes import Well
from fockbath.observables import ReducedDensity
from fockbath.series import TimeSeries


class StepTooCoarseError(NumericalError):
	"""The integration step does not resolve the noise correlation time."""
	pass


class MissingFitError(FockbathError, KeyError):
	"""An occupation fit needed for the mean-field parameters is absent."""
	pass


# Name of the bit generator, echoed into output headers
RNG_ALGORITHM = "Philox"

# Trajectories per chunk (fixed so results do not depend on worker count)
CHUNK_SIZE = 500

# Largest step as a fraction of tau_c
MAX_STEP_FRACTION = 0.1

NOISE_CHANNELS = ("independent", "common")

SIGMA_READINGS = ("std", "variance")


def noise_scale(value, reading="std"):
	"""The OU amplitude sigma from a quoted noise value.

	``"std"`` takes the value as the standard deviation itself,
	``"variance"`` as its square.
	"""
	if reading == "std":
		return float(value)
	elif reading == "variance":
		if value < 0.0:
			raise ValueError("a variance cannot be negative")
		return float(np.sqrt(value))
	raise ValueError("unknown sigma reading {!r}; expected one of {}".format(
		reading, ", ".join(SIGMA_READINGS)))


class NoiseSpec(object):
	"""Parameters of the level-shift noise.

	Parameters
	----------
	sigma : float
		Standard deviation of delta_eps (hbar*omega0).
	tau_c : float or None
		Correlation time (1/omega0); 1/sigma if None.
	seed : int
	ensemble : int
		Number of trajectories.
	channels : "independent" or "common"
		Independent noise per tunnelling eigenlevel, or one shared stream
		(a pure global phase).
	"""

	def __init__(self, sigma, tau_c=None, seed=0, ensemble=1000,
	             channels="independent"):
		if sigma < 0.0:
			raise ValueError("sigma must be non-negative")
		if tau_c is None:
			tau_c = 1.0 / sigma if sigma > 0.0 else np.inf
		if tau_c <= 0.0:
			raise ValueError("tau_c must be positive")
		if ensemble < 1:
			raise ValueError("ensemble must hold at least one trajectory")
		if channels not in NOISE_CHANNELS:
			raise ValueError("unknown noise channels {!r}".format(channels))

		self.sigma = float(sigma)
		self.tau_c = float(tau_c)
		self.seed = int(seed)
		self.ensemble = int(ensemble)
		self.channels = channels

	def describe(self):
		return {"sigma": self.sigma, "tau_c": self.tau_c, "seed": self.seed,
		        "ensemble": self.ensemble, "channels": self.channels,
		        "rng": RNG_ALGORITHM}

	def __repr__(self):
		return "NoiseSpec(sigma={}, tau_c={}, seed={}, ensemble={})".format(
			self.sigma, self.tau_c, self.seed, self.ensemble)


class MeanFieldParams(object):
	"""Bath-induced probe parameters: induced tunnelling J0 and on-site
	shifts eps_L, eps_R with their variances."""

	def __init__(self, j0, eps_left, eps_right, var_j, var_eps_left,
	             var_eps_right, j_s):
		for name, value in (("var_j", var_j), ("var_eps_left", var_eps_left),
		                    ("var_eps_right", var_eps_right)):
			if value < 0.0:
				raise ValueError("{} must be non-negative".format(name))
		self.j0 = float(j0)
		self.eps_left = float(eps_left)
		self.eps_right = float(eps_right)
		self.var_j = float(var_j)
		self.var_eps_left = float(var_eps_left)
		self.var_eps_right = float(var_eps_right)
		self.j_s = float(j_s)

	@property
	def eps0(self):
		return 0.5 * (self.eps_left + self.eps_right)

	@property
	def var_eps(self):
		return 0.5 * (self.var_eps_left + self.var_eps_right)

	@property
	def j_s_effective(self):
		"""J_s' = J_s - J0."""
		return self.j_s - self.j0

	def to_dict(self):
		return {"j0": self.j0, "eps_left": self.eps_left,
		        "eps_right": self.eps_right, "eps0": self.eps0,
		        "var_j": self.var_j, "var_eps_left": self.var_eps_left,
		        "var_eps_right": self.var_eps_right, "var_eps": self.var_eps,
		        "j_s": self.j_s, "j_s_effective": self.j_s_effective}


def mean_field_from_microscopic(coupling, g_i, fits, j_s, n_atoms=None,
                                bands=2):
	"""Propagate occupation statistics through the coupling tensor.

	J0 = g_I sum_{l,a} C^{l,l}_{a,a,L,R} <n_a^l> and
	eps_r = g_I sum_{l,a} C^{l,l}_{a,a,r,r} <n_a^l>, with variances
	g_I^2 sum C^2 var(n_a^l) for independent Gaussian occupations.

	Parameters
	----------
	coupling : ndarray
		C tensor.
	fits : {label: fit}
		Objects with ``mean`` and ``variance`` per mode label ("nL0", ...).
	n_atoms : int or None
		If given the fits are per atom and are rescaled to raw counts.

	Raises
	------
	MissingFitError
	"""
	coupling = np.asarray(coupling)
	scale = 1.0 if n_atoms is None else float(n_atoms)

	j0 = var_j = 0.0
	eps = [0.0, 0.0]
	var_eps = [0.0, 0.0]
	for band in range(bands):
		for well in Well:
			label = "n{}{}".format(well.label, band)
			if label not in fits:
				raise MissingFitError("no occupation fit for {}".format(label))
			mean = fits[label].mean * scale
			variance = fits[label].variance * scale**2

			weight = coupling[band, band, well, well, Well.left, Well.right]
			j0 += g_i * weight * mean
			var_j += (g_i * weight)**2 * variance
			for r in Well:
				weight = coupling[band, band, well, well, r, r]
				eps[r] += g_i * weight * mean
				var_eps[r] += (g_i * weight)**2 * variance

	return MeanFieldParams(j0, eps[Well.left], eps[Well.right], var_j,
	                       var_eps[Well.left], var_eps[Well.right], j_s)


################################################################################
# Analytic phase variance
################################################################################

Theta = namedtuple("Theta", ["exact", "linear", "asymptote"])
"""Theta(t): the exact double integral, the linear form 2 sigma^2 tau_c t and
the large-t asymptote 2 sigma^2 tau_c t - sigma^2 tau_c^2."""


def theta_analytic(noise, t):
	"""Theta(t) = 2 int_0^t int_0^t sigma^2 exp(-2|t'-t''|/tau_c) dt' dt''."""
	t = np.asarray(t, dtype=float)
	if np.any(t < 0.0):
		raise ValueError("t must be non-negative")
	sigma2 = noise.sigma**2
	if sigma2 == 0.0:
		zeros = np.zeros_like(t)
		return Theta(zeros, zeros, zeros)
	tau = noise.tau_c
	linear = 2.0 * sigma2 * tau * t
	exact = linear - sigma2 * tau**2 * -np.expm1(-2.0 * t / tau)
	return Theta(exact, linear, linear - sigma2 * tau**2)


def dephasing_rate(noise):
	"""Asymptotic decay rate of 2P - 1 = exp(-Theta), i.e. 2 sigma^2 tau_c."""
	return 2.0 * noise.sigma**2 * noise.tau_c


def phase_model_density(period, theta, times):
	"""Probe density matrices of the two-level phase model.

	With <cos th> = cos(t/T) exp(-Theta/2) and <sin th> likewise,
	rho = 1/2 [[1 + <cos>, i<sin>], [-i<sin>, 1 - <cos>]].

	Parameters
	----------
	period : float
		T > 0.
	theta : array
		Theta at each time (non-decreasing).
	times : array

	Returns
	-------
	[:py:class:`fockbath.observables.ReducedDensity`, ...]
	"""
	if period <= 0.0:
		raise ValueError("the period must be positive")
	times = np.asarray(times, dtype=float)
	theta = np.broadcast_to(np.asarray(theta, dtype=float), times.shape)
	damping = np.exp(-0.5 * theta)
	c = np.cos(times / period) * damping
	s = np.sin(times / period) * damping
	return [ReducedDensity(0.5 * np.array([[1.0 + ci, 1j * si],
	                                       [-1j * si, 1.0 - ci]]))
	        for ci, si in zip(c, s)]


def phase_model_purity(theta):
	"""1/2 (1 + exp(-Theta))."""
	return 0.5 * (1.0 + np.exp(-np.asarray(theta, dtype=float)))


################################################################################
# Monte Carlo
################################################################################

def chunk_rng(seed, chunk):
	"""The generator for trajectory chunk ``chunk``."""
	sequence = np.random.SeedSequence(seed, spawn_key=(chunk, ))
	return np.random.Generator(np.random.Philox(sequence))


def ou_coefficients(noise, dt):
	"""(decay, kick) of the exact update x' = decay*x + kick*xi."""
	decay = np.exp(-2.0 * dt / noise.tau_c)
	kick = noise.sigma * np.sqrt(-np.expm1(-4.0 * dt / noise.tau_c))
	return decay, kick


def ou_path(noise, n_steps, dt, rng, size=()):
	"""A stationary OU path of ``n_steps + 1`` values (time along the last
	axis)."""
	decay, kick = ou_coefficients(noise, dt)
	shape = tuple(np.atleast_1d(size)) if size != () else ()
	path = np.empty(shape + (n_steps + 1, ))
	path[..., 0] = noise.sigma * rng.standard_normal(shape)
	for k in range(n_steps):
		path[..., k + 1] = decay * path[..., k] + kick * rng.standard_normal(shape)
	return path


# Accumulators summed over trajectories, one entry per record time
_SUMS = ("p_left", "rho_lr", "coherence", "cos", "cos2", "sin")


def _simulate_chunk(mf, noise, n_steps, dt, sample_every, chunk, size):
	rng = chunk_rng(noise.seed, chunk)
	channels = 2 if noise.channels == "independent" else 1
	decay, kick = ou_coefficients(noise, dt)
	j = mf.j_s_effective

	n_records = n_steps // sample_every + 1
	sums = {name: np.zeros(n_records, dtype=complex) for name in _SUMS}

	shift = noise.sigma * rng.standard_normal((channels, size))
	phase = np.zeros((channels, size))

	def record(k, t):
		x_plus = phase[0]
		x_minus = phase[-1]
		# Eigenlevels |+> = (|L>+|R>)/sqrt2 at -J', |-> at +J'
		a_plus = np.exp(-1j * ((mf.eps0 - j) * t + x_plus))
		a_minus = np.exp(-1j * ((mf.eps0 + j) * t + x_minus))
		a_left = 0.5 * (a_plus + a_minus)
		a_right = 0.5 * (a_plus - a_minus)
		sums["p_left"][k] = np.sum(np.abs(a_left)**2)
		sums["rho_lr"][k] = np.sum(a_left.conj() * a_right)
		sums["coherence"][k] = np.sum(a_plus * a_minus.conj())
		sums["cos"][k] = np.sum(np.cos(x_plus))
		sums["cos2"][k] = np.sum(np.cos(x_plus)**2)
		sums["sin"][k] = np.sum(np.sin(x_plus))

	record(0, 0.0)
	for step in range(1, n_steps + 1):
		new_shift = decay * shift + kick * rng.standard_normal((channels, size))
		phase += 0.5 * dt * (shift + new_shift)
		shift = new_shift
		if step % sample_every == 0:
			record(step // sample_every, step * dt)
	return sums


def simulate_dephasing(mf, noise, t_end, dt, sample_every=1, workers=1):
	"""Ensemble-averaged probe dynamics under level-shift noise.

	Parameters
	----------
	mf : :py:class:`MeanFieldParams`
	noise : :py:class:`NoiseSpec`
	t_end, dt : float
		Run length and integration step.
	sample_every : int
		Record every this many steps.
	workers : int
		Threads simulating chunks concurrently.

	Returns
	-------
	:py:class:`fockbath.series.TimeSeries`
		Columns t, pL_mean, purity (of the averaged rho), offdiag_abs
		(|<exp(-iX)>| of one level), offdiag_stderr, offdiag_predicted
		(exp(-Theta/4)), coherence_abs (eigenbasis coherence, 1 initially),
		theta_exact, theta_linear, theta_asymptote.

	Raises
	------
	StepTooCoarseError
		If dt > tau_c / 10.
	"""
	if dt <= 0.0 or t_end <= 0.0:
		raise ValueError("t_end and dt must be positive")
	if dt > MAX_STEP_FRACTION * noise.tau_c:
		raise StepTooCoarseError(
			"step {} does not resolve tau_c = {} (need dt <= tau_c/10)".format(
				dt, noise.tau_c))

	n_steps = int(round(t_end / dt))
	sample_every = max(1, int(sample_every))
	chunks = [(k, min(CHUNK_SIZE, noise.ensemble - k * CHUNK_SIZE))
	          for k in range((noise.ensemble + CHUNK_SIZE - 1) // CHUNK_SIZE)]
	logging.info("Simulating {} trajectories in {} chunks, {} steps".format(
		noise.ensemble, len(chunks), n_steps))

	def run(chunk):
		k, size = chunk
		return _simulate_chunk(mf, noise, n_steps, dt, sample_every, k, size)

	if workers > 1:
		with ThreadPoolExecutor(max_workers=workers) as executor:
			results = list(executor.map(run, chunks))
	else:
		results = [run(chunk) for chunk in chunks]

	m = float(noise.ensemble)
	totals = {name: sum(r[name] for r in results) for name in _SUMS}

	times = np.arange(n_steps // sample_every + 1) * sample_every * dt
	p_left = totals["p_left"].real / m
	rho_lr = totals["rho_lr"] / m
	rho_purity = p_left**2 + (1.0 - p_left)**2 + 2.0 * np.abs(rho_lr)**2
	mean_cos = totals["cos"].real / m
	mean_sin = totals["sin"].real / m
	spread = np.maximum(totals["cos2"].real / m - mean_cos**2, 0.0)
	theta = theta_analytic(noise, times)

	return TimeSeries([
		("t", times),
		("pL_mean", p_left),
		("purity", rho_purity),
		("offdiag_abs", np.hypot(mean_cos, mean_sin)),
		("offdiag_stderr", np.sqrt(spread / m)),
		("offdiag_predicted", np.exp(-0.25 * theta.exact)),
		("coherence_abs", np.abs(totals["coherence"]) / m),
		("theta_exact", theta.exact),
		("theta_linear", theta.linear),
		("theta_asymptote", theta.asymptote),
	], metadata=dict(noise.describe(), dt=dt, **{
		"j_s_effective": mf.j_s_effective, "eps0": mf.eps0}))
