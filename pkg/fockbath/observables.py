"""
The probe's reduced density matrix, its purity, and decay-rate fits.
"""

from collections import namedtuple

import logging

import numpy as np

from scipy.signal import find_peaks
from scipy.stats import linregress

from fockbath.errors import FitError


class ReducedDensity(object):
	"""The probe's 2x2 density matrix in the (L, R) basis."""

	def __init__(self, matrix):
		matrix = np.asarray(matrix, dtype=complex)
		if matrix.shape != (2, 2):
			raise ValueError("a probe density matrix is 2x2")
		self.matrix = matrix

	@property
	def p_left(self):
		return self.matrix[0, 0].real

	@property
	def p_right(self):
		return self.matrix[1, 1].real

	@property
	def coherence(self):
		"""The off-diagonal element rho_LR."""
		return self.matrix[0, 1]

	@property
	def trace(self):
		return np.trace(self.matrix).real

	def eigenvalues(self):
		return np.linalg.eigvalsh(self.matrix)

	def is_valid(self, tolerance=1e-10):
		"""Hermitian, unit trace and positive semi-definite."""
		hermitian = np.allclose(self.matrix, self.matrix.conj().T,
		                        rtol=0.0, atol=tolerance)
		if not hermitian:
			return False
		eigenvalues = self.eigenvalues()
		return (abs(self.trace - 1.0) <= tolerance and
		        eigenvalues.min() >= -tolerance and
		        eigenvalues.max() <= 1.0 + tolerance)

	def rotated(self, unitary):
		"""U rho U^dagger for a probe-local unitary."""
		unitary = np.asarray(unitary)
		return ReducedDensity(unitary.dot(self.matrix).dot(unitary.conj().T))

	def __repr__(self):
		return "ReducedDensity({!r})".format(self.matrix.tolist())


def reduce(state, basis):
	"""Trace the bath out of a combined state.

	With amplitudes A_n (probe left) and B_n (probe right) for each bath ket n,
	rho = [[sum |A_n|^2, sum A_n* B_n], [sum A_n B_n*, sum |B_n|^2]].

	Parameters
	----------
	state : :py:class:`fockbath.dynamics.QuantumState` or ndarray
	basis : :py:class:`fockbath.fock_basis.BasisIndex`
	"""
	amplitudes = getattr(state, "amplitudes", state)
	# Probe is the fastest-varying factor: column 0 is A, column 1 is B
	pairs = np.asarray(amplitudes).reshape(basis.dim_bath, 2)
	return ReducedDensity(pairs.conj().T.dot(pairs))


def purity(rho):
	"""Tr rho^2 = sum_ij |rho_ij|^2 for a Hermitian rho."""
	matrix = getattr(rho, "matrix", rho)
	return float(np.sum(np.abs(matrix)**2))


################################################################################
# Exponential fits
################################################################################

# Observables available for decay fitting
OBSERVABLES = ("purity_excess", "amplitude", "purity")

# Minimum number of points in a fit
MIN_FIT_POINTS = 5

# Fit windows start this long after the coupling switch
FIT_DELAY = 10.0


DecayFit = namedtuple("DecayFit", ["observable", "rate", "r_squared",
                                   "amplitude", "window", "n_points",
                                   "envelope"])
"""The result of :py:func:`fit_exponential`.

rate : decay rate gamma (omega0), observable ~ amplitude * exp(-rate * t)
r_squared : goodness of the log-linear fit
window : (t0, t1)
n_points : number of (envelope or raw) points fitted
envelope : True if local maxima were fitted, False for the raw samples
"""


def observable_values(series, observable):
	"""The named decay observable evaluated along ``series``."""
	if observable == "purity_excess":
		return 2.0 * series["purity"] - 1.0
	elif observable == "amplitude":
		return np.abs(2.0 * series["pL"] - 1.0)
	elif observable == "purity":
		return np.asarray(series["purity"])
	raise ValueError("unknown observable {!r}; expected one of {}".format(
		observable, ", ".join(OBSERVABLES)))


def envelope(t, values):
	"""Local maxima of an oscillating signal.

	Falls back to the raw samples when fewer than :py:data:`MIN_FIT_POINTS`
	maxima exist (monotone or constant signals).

	Returns
	-------
	(t, values, used_envelope)
	"""
	peaks, _ = find_peaks(values)
	if len(peaks) >= MIN_FIT_POINTS:
		return t[peaks], values[peaks], True
	return t, values, False


def fit_exponential(series, window, observable="purity_excess",
                    use_envelope=True):
	"""Least-squares fit of log(observable) against t.

	Parameters
	----------
	series : :py:class:`fockbath.series.TimeSeries`
	window : (t0, t1)
	observable : str
		One of :py:data:`OBSERVABLES`.
	use_envelope : bool
		Fit the local maxima of the observable rather than every sample.

	Returns
	-------
	:py:class:`DecayFit`

	Raises
	------
	FitError
		If the series does not cover the window, fewer than five points remain
		or any fitted value is non-positive.
	"""
	t0, t1 = window
	if t1 <= t0:
		raise FitError("empty fit window [{}, {}]".format(t0, t1))
	if len(series) == 0 or series.t[0] > t0 + 1e-9 or series.t[-1] < t1 - 1e-9:
		raise FitError("series does not cover the window [{}, {}]".format(t0, t1))

	windowed = series.window(t0, t1)
	t = windowed.t
	values = observable_values(windowed, observable)
	used_envelope = False
	if use_envelope:
		t, values, used_envelope = envelope(t, values)
		if not used_envelope:
			logging.warning(
				"{}: fewer than {} maxima in [{}, {}], fitting every "
				"sample".format(observable, MIN_FIT_POINTS, t0, t1))

	if len(values) < MIN_FIT_POINTS:
		raise FitError("only {} points to fit in [{}, {}]".format(
			len(values), t0, t1))
	if np.any(values <= 0.0):
		raise FitError("{} is not positive throughout [{}, {}]".format(
			observable, t0, t1))

	logs = np.log(values)
	fit = linregress(t, logs)
	residual = logs - (fit.intercept + fit.slope * t)
	total = np.sum((logs - logs.mean())**2)
	if total == 0.0:
		r_squared = 1.0
	else:
		r_squared = 1.0 - np.sum(residual**2) / total

	return DecayFit(observable, -fit.slope, r_squared, np.exp(fit.intercept),
	                (t0, t1), len(values), used_envelope)


def default_window(t_switch, t_end):
	"""The fit window skipping the initial drop after the switch."""
	return (t_switch + FIT_DELAY, t_end)


def decay_fits(series, window):
	"""Fit every observable in :py:data:`OBSERVABLES`.

	Returns
	-------
	{observable: dict}
		Each entry holds the fit fields, or ``{"error": message}`` if the fit
		failed.
	"""
	out = {}
	for observable in OBSERVABLES:
		try:
			fit = fit_exponential(series, window, observable)
		except FitError as e:
			out[observable] = {"error": str(e)}
		else:
			out[observable] = dict(fit._asdict(), window=list(fit.window))
	return out


Revival = namedtuple("Revival", ["found", "minimum_time", "minimum",
                                 "revival_time", "revival_purity"])


def find_revival(series, t_start=0.0, threshold=0.8):
	"""Look for purity recovering above ``threshold`` after its first local
	minimum at or after ``t_start``."""
	windowed = series.window(t_start)
	t = windowed.t
	values = np.asarray(windowed["purity"])
	minima, _ = find_peaks(-values)
	if len(minima) == 0:
		return Revival(False, None, None, None, None)

	first = minima[0]
	later = np.nonzero(values[first:] > threshold)[0]
	if len(later) == 0:
		return Revival(False, t[first], values[first], None, None)
	k = first + later[0]
	return Revival(True, t[first], values[first], t[k], values[k])
