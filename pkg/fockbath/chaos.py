"""
Eigenbasis diagnostics of the bath Hamiltonian and occupation statistics.

The bath Hamiltonian is diagonalised densely. From the decomposition we get
eigenstate profiles (how an eigenstate spreads over Fock kets ordered by
their diagonal energy), the statistics of the off-diagonal occupation matrix
elements n_ab in an energy window, and the perturbative scales (mean level
spacing and mean squared interband coupling) that control the spreading.

Occupation histograms of a thermalised time series are compared with a
Gaussian by a chi-square test on an effective sample count (the samples are
correlated in time) and a bimodality check.
"""

import logging

from collections import OrderedDict, namedtuple

import numpy as np

from scipy.linalg import eigh
from scipy.stats import chi2, kurtosis, norm, skew

from fockbath.errors import NumericalError, FitError
from fockbath.fock_basis import BasisTooLargeError
from fockbath.modes import Mode


class WindowTooNarrowError(NumericalError):
	"""An energy window holds too few eigenstates for statistics."""
	pass


class SampleSizeError(NumericalError):
	"""Too few samples to build a histogram."""
	pass


# Largest bath dimension diagonalised densely
DEFAULT_DENSE_CAP = 8000

# Fewest eigenstates accepted in a statistics window
MIN_WINDOW_STATES = 100

# Fewest samples accepted for a histogram
MIN_HISTOGRAM_SAMPLES = 200

# Histogram bins expecting fewer counts than this are pooled
MIN_EXPECTED_COUNT = 5.0

# Bimodality coefficient of a uniform distribution; larger suggests two modes
BIMODALITY_THRESHOLD = 5.0 / 9.0

# Gaussianity threshold for the chi-square p-value
GAUSSIAN_P_VALUE = 0.01


class EigenDecomposition(object):
	"""Eigenpairs of a bath operator.

	Attributes
	----------
	energies : ndarray
		Ascending eigenvalues E_a.
	vectors : ndarray
		Column ``a`` holds the components C_n^a over bath kets n.
	diagonal : ndarray
		Diagonal Fock-basis energies eps_n = <n|H_T|n>.
	"""

	def __init__(self, energies, vectors, diagonal, operator=None):
		self.energies = energies
		self.vectors = vectors
		self.diagonal = diagonal
		self.operator = operator

	@property
	def dimension(self):
		return len(self.energies)

	def residual(self):
		"""Largest ||H v - E v|| over all eigenpairs."""
		if self.operator is None:
			raise ValueError("decomposition has no operator attached")
		product = self.operator.matrix.dot(self.vectors)
		return np.max(np.linalg.norm(product - self.vectors * self.energies,
		                             axis=0))

	def orthonormality_error(self):
		overlap = self.vectors.conj().T.dot(self.vectors)
		return np.max(np.abs(overlap - np.eye(self.dimension)))

	def closest(self, energy):
		"""Index of the eigenvalue closest to ``energy``."""
		return int(np.argmin(np.abs(self.energies - energy)))

	def window_indices(self, window):
		lo, hi = window
		return np.nonzero((self.energies >= lo) & (self.energies <= hi))[0]

	def expectation_matrix(self, diagonal_operator, indices=None):
		"""<a|O|b> for an operator diagonal in the Fock basis."""
		vectors = self.vectors if indices is None else self.vectors[:, indices]
		return vectors.conj().T.dot(diagonal_operator[:, None] * vectors)


def eigensolve_bath(operator, sectors=None, cap=DEFAULT_DENSE_CAP):
	"""Full eigendecomposition of a bath operator.

	Parameters
	----------
	operator : :py:class:`fockbath.hamiltonian.SparseOperator`
		The bath Hamiltonian (bath factor only).
	sectors : ndarray or None
		Optional conserved label per bath ket. The operator must not connect
		kets with different labels; each sector is then diagonalised alone so
		that eigenvectors never mix sectors, even at degeneracies.
	cap : int
		Largest dimension accepted.

	Raises
	------
	BasisTooLargeError
		If the dimension exceeds ``cap``.
	"""
	dimension = operator.dimension
	if dimension > cap:
		raise BasisTooLargeError(
			"dense eigensolve of dimension {} exceeds cap {}".format(dimension,
			                                                        cap))

	dense = operator.toarray().real
	diagonal = np.diag(dense).copy()
	if sectors is None:
		energies, vectors = eigh(dense)
	else:
		sectors = np.asarray(sectors)
		energies = np.zeros(dimension)
		vectors = np.zeros((dimension, dimension))
		start = 0
		for label in np.unique(sectors):
			members = np.nonzero(sectors == label)[0]
			block_energies, block_vectors = eigh(dense[np.ix_(members, members)])
			stop = start + len(members)
			energies[start:stop] = block_energies
			vectors[members, start:stop] = block_vectors
			start = stop
		order = np.argsort(energies, kind="mergesort")
		energies = energies[order]
		vectors = vectors[:, order]

	logging.info("Diagonalised bath operator of dimension {}".format(dimension))
	return EigenDecomposition(energies, vectors, diagonal, operator)


def band_sectors(basis):
	"""Lower-band population of every bath ket (conserved when U^01 = 0)."""
	lower = [i for i, mode in enumerate(basis.modes) if mode.band == 0]
	return basis.kets[:, lower].sum(axis=1)


################################################################################
# Eigenstate profiles
################################################################################

EigenProfile = namedtuple("EigenProfile", [
	"index", "energy", "diagonal_energies", "components",
	"participation_ratio", "energy_mean", "energy_width"])
"""How one eigenstate spreads over the Fock basis.

diagonal_energies, components : eps_n and C_n^a, one per bath ket
participation_ratio : 1 / sum |C_n|^4
energy_mean, energy_width : mean and standard deviation of eps_n weighted by
	|C_n|^2
"""


def eigenstate_profile(decomposition, index=None, energy=None):
	"""Profile of eigenstate ``index``, or of the one closest to ``energy``,
	or of the middle of the spectrum if neither is given."""
	if index is None:
		if energy is None:
			index = decomposition.dimension // 2
		else:
			index = decomposition.closest(energy)
	components = decomposition.vectors[:, index]
	weights = np.abs(components)**2
	eps = decomposition.diagonal
	mean = np.sum(weights * eps)
	width = np.sqrt(max(np.sum(weights * (eps - mean)**2), 0.0))
	return EigenProfile(int(index), float(decomposition.energies[index]), eps,
	                    components, 1.0 / np.sum(weights**2), mean, width)


def profile_columns(profile):
	"""CSV columns for a profile, ordered by diagonal energy."""
	order = np.argsort(profile.diagonal_energies, kind="mergesort")
	return OrderedDict([
		("ket", order),
		("eps", profile.diagonal_energies[order]),
		("component", np.real(profile.components[order])),
		("weight", np.abs(profile.components[order])**2),
	])


################################################################################
# Off-diagonal occupation statistics
################################################################################

OffDiagonalStats = namedtuple("OffDiagonalStats", [
	"mode", "window", "n_states", "n_pairs", "mean", "std", "standard_error",
	"diagonal_mean", "level_spacing", "delta_squared",
	"spacing_sq_over_delta_sq", "delta_sq_over_spacing"])
"""Statistics of n_ab (a != b) for one bath mode within an energy window,
with the mean level spacing of the reference spectrum and the mean squared
interband coupling delta^2 = Tr V^2 / D_bath."""


def energy_window(decomposition, center, n_states=MIN_WINDOW_STATES):
	"""The narrowest window around ``center`` holding ``n_states`` levels."""
	n_states = min(n_states, decomposition.dimension)
	distance = np.abs(decomposition.energies - center)
	nearest = np.sort(np.argsort(distance, kind="mergesort")[:n_states])
	return (float(decomposition.energies[nearest[0]]),
	        float(decomposition.energies[nearest[-1]]))


def mean_level_spacing(energies, window):
	"""Mean spacing of the levels inside ``window``."""
	lo, hi = window
	inside = np.sort(energies[(energies >= lo) & (energies <= hi)])
	if len(inside) < 2:
		raise WindowTooNarrowError("fewer than two levels in [{}, {}]".format(lo,
		                                                                      hi))
	return float(np.mean(np.diff(inside)))


def mean_squared_coupling(interband):
	"""Tr V^2 / D for a Hermitian operator V."""
	data = interband.matrix.data
	return float(np.sum(np.abs(data)**2) / interband.dimension)


def offdiag_occupation_stats(decomposition, basis, mode, window,
                             reference_energies=None, interband=None,
                             min_states=MIN_WINDOW_STATES):
	"""Statistics of the off-diagonal occupation matrix elements.

	Parameters
	----------
	decomposition : :py:class:`EigenDecomposition`
	basis : :py:class:`fockbath.fock_basis.BasisIndex`
	mode : :py:class:`fockbath.modes.Mode` or int
	window : (lo, hi)
		Energy window selecting eigenstates.
	reference_energies : ndarray or None
		Spectrum without interband coupling, for the mean level spacing.
	interband : SparseOperator or None
		The interband coupling V, for delta^2.
	min_states : int

	Raises
	------
	WindowTooNarrowError
	"""
	indices = decomposition.window_indices(window)
	if len(indices) < min_states:
		raise WindowTooNarrowError(
			"window [{:.6g}, {:.6g}] holds {} eigenstates, need {}".format(
				window[0], window[1], len(indices), min_states))

	occupation = basis.occupation(mode).astype(float)
	matrix = decomposition.expectation_matrix(occupation, indices).real
	upper = np.triu_indices(len(indices), k=1)
	values = matrix[upper]

	std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
	spacing = None
	if reference_energies is not None:
		spacing = mean_level_spacing(np.asarray(reference_energies), window)
	delta_squared = None
	if interband is not None:
		delta_squared = mean_squared_coupling(interband)

	ratio_a = ratio_b = None
	if spacing is not None and delta_squared is not None and delta_squared > 0:
		ratio_a = spacing**2 / delta_squared
		ratio_b = delta_squared / spacing

	if not isinstance(mode, (int, np.integer)):
		mode = basis.modes.index(mode)
	return OffDiagonalStats(
		basis.modes[mode].label, tuple(window), len(indices), len(values),
		float(np.mean(values)), std, std / np.sqrt(len(values)),
		float(np.mean(np.diag(matrix))), spacing, delta_squared,
		ratio_a, ratio_b)


def diagonal_ensemble(decomposition, basis, bath_vector):
	"""Long-time averages sum_a |A_a|^2 n_aa per atom for each mode."""
	vectors = decomposition.vectors
	weights = np.abs(vectors.conj().T.dot(bath_vector))**2
	# sum_a |A_a|^2 |C_n^a|^2 for every ket n
	ket_weights = np.einsum("na,na,a->n", vectors.conj(), vectors, weights).real
	out = {}
	for i, mode in enumerate(basis.modes):
		occupation = basis.kets[:, i].astype(float)
		out[mode.label] = float(occupation.dot(ket_weights)) / basis.n_atoms
	return out


################################################################################
# Occupation histograms
################################################################################

class GaussianFit(object):
	"""A Gaussian matched to a sample by its mean and variance, with the
	histogram it was compared against.

	Attributes
	----------
	mean, variance : float
	n_samples : int
	effective_samples : float
		Sample count corrected for autocorrelation.
	chi_square, dof, p_value : float, int, float
	bimodality : float
		Bimodality coefficient (above 5/9 suggests two modes).
	bin_edges, density : ndarray
		The normalised histogram.
	"""

	def __init__(self, mean, variance, n_samples, effective_samples,
	             chi_square, dof, p_value, bimodality, bin_edges, density):
		if variance <= 0.0:
			raise ValueError("variance must be positive")
		self.mean = mean
		self.variance = variance
		self.n_samples = n_samples
		self.effective_samples = effective_samples
		self.chi_square = chi_square
		self.dof = dof
		self.p_value = p_value
		self.bimodality = bimodality
		self.bin_edges = bin_edges
		self.density = density

	@property
	def std(self):
		return np.sqrt(self.variance)

	@property
	def unimodal(self):
		return self.bimodality <= BIMODALITY_THRESHOLD

	@property
	def is_gaussian(self):
		return self.unimodal and self.p_value > GAUSSIAN_P_VALUE

	@property
	def bin_centers(self):
		return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

	def pdf(self, x):
		return norm.pdf(x, self.mean, self.std)

	def to_dict(self):
		return {
			"mean": self.mean,
			"variance": self.variance,
			"std": self.std,
			"n_samples": self.n_samples,
			"effective_samples": self.effective_samples,
			"chi_square": self.chi_square,
			"dof": self.dof,
			"p_value": self.p_value,
			"bimodality": self.bimodality,
			"is_gaussian": self.is_gaussian,
		}

	def __repr__(self):
		return "GaussianFit(mean={:.4g}, variance={:.4g}, p={:.3g})".format(
			self.mean, self.variance, self.p_value)


def integrated_autocorrelation_time(values):
	"""1 + 2 sum_k rho_k, summed while the autocorrelation stays positive."""
	values = np.asarray(values, dtype=float) - np.mean(values)
	n = len(values)
	variance = np.dot(values, values) / n
	if variance == 0.0:
		return 1.0
	spectrum = np.fft.rfft(values, 2 * n)
	autocovariance = np.fft.irfft(spectrum * spectrum.conj())[:n] / n
	rho = autocovariance / variance
	tau = 1.0
	for k in range(1, n):
		if rho[k] <= 0.0:
			break
		tau += 2.0 * rho[k]
	return tau


def bimodality_coefficient(values):
	"""(g^2 + 1) / (k + 3 (n-1)^2 / ((n-2)(n-3))) with sample skewness g and
	excess kurtosis k."""
	n = len(values)
	g = skew(values, bias=False)
	k = kurtosis(values, bias=False)
	return float((g**2 + 1.0) / (k + 3.0 * (n - 1.0)**2 /
	                             ((n - 2.0) * (n - 3.0))))


def _pool(observed, expected):
	"""Merge neighbouring bins until every expected count reaches
	:py:data:`MIN_EXPECTED_COUNT`."""
	pooled_o = []
	pooled_e = []
	o_acc = e_acc = 0.0
	for o, e in zip(observed, expected):
		o_acc += o
		e_acc += e
		if e_acc >= MIN_EXPECTED_COUNT:
			pooled_o.append(o_acc)
			pooled_e.append(e_acc)
			o_acc = e_acc = 0.0
	if e_acc > 0.0 or o_acc > 0.0:
		if pooled_e:
			pooled_o[-1] += o_acc
			pooled_e[-1] += e_acc
		else:
			pooled_o.append(o_acc)
			pooled_e.append(e_acc)
	return np.array(pooled_o), np.array(pooled_e)


def gaussian_fit(values, min_samples=MIN_HISTOGRAM_SAMPLES):
	"""Histogram ``values`` (Freedman-Diaconis bins) and compare with the
	Gaussian of the same mean and variance.

	Raises
	------
	SampleSizeError
		Fewer than ``min_samples`` values.
	FitError
		The values are constant.
	"""
	values = np.asarray(values, dtype=float)
	values = values[np.isfinite(values)]
	n = len(values)
	if n < min_samples:
		raise SampleSizeError("{} samples, need at least {}".format(n,
		                                                             min_samples))

	mean = float(np.mean(values))
	variance = float(np.var(values, ddof=1))
	if variance <= 0.0:
		raise FitError("sample has zero variance")

	edges = np.histogram_bin_edges(values, bins="fd")
	if len(edges) < 3:
		edges = np.histogram_bin_edges(values, bins="sturges")
	counts, edges = np.histogram(values, bins=edges)
	density = counts / (n * np.diff(edges))

	n_effective = n / integrated_autocorrelation_time(values)
	probabilities = np.diff(norm.cdf(edges, mean, np.sqrt(variance)))
	probabilities = probabilities / probabilities.sum()
	observed, expected = _pool(counts * (n_effective / n),
	                           probabilities * n_effective)
	chi_square = float(np.sum((observed - expected)**2 / expected))
	dof = max(len(observed) - 3, 1)
	p_value = float(chi2.sf(chi_square, dof))

	return GaussianFit(mean, variance, n, n_effective, chi_square, dof,
	                   p_value, bimodality_coefficient(values), edges, density)


def occupation_histogram(series, mode, window=None,
                         min_samples=MIN_HISTOGRAM_SAMPLES):
	"""Gaussian fit to the per-atom occupation of one bath mode.

	Parameters
	----------
	series : :py:class:`fockbath.series.TimeSeries`
		A protocol run.
	mode : :py:class:`fockbath.modes.Mode` or column label (e.g. "nL0")
	window : (t0, t1) or None
		Samples used; the whole series if None.
	"""
	label = mode.label if isinstance(mode, Mode) else mode
	if window is not None:
		series = series.window(*window)
	return gaussian_fit(series[label], min_samples)


def histogram_columns(fit):
	"""CSV columns: bin centre, empirical density and the fitted Gaussian."""
	centers = fit.bin_centers
	return OrderedDict([
		("bin_center", centers),
		("density", fit.density),
		("gaussian", fit.pdf(centers)),
	])
