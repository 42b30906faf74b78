"""
Unitary time evolution of the combined bath+probe state.

Two propagators are provided: a Lanczos (Krylov subspace) propagator for
large bases and a dense eigendecomposition propagator for small ones.
:py:func:`run_protocol` drives the two-stage switch-on experiment: the bath
and the free probe evolve independently until ``t_switch``, after which the
full coupled Hamiltonian applies.
"""

import logging

import numpy as np

from scipy.linalg import eigh, eigh_tridiagonal

from fockbath.errors import NumericalError
from fockbath.hamiltonian import (bath_sector_weight, build_free,
                                 build_hamiltonian)
from fockbath.modes import Well
from fockbath.observables import purity, reduce
from fockbath.series import TimeSeries


class KrylovConvergenceError(NumericalError):
	"""The Krylov propagator could not meet its tolerance even after
	repeatedly halving the step."""
	pass


# Default numerical settings
DEFAULT_TOLERANCE = 1e-10
DEFAULT_KRYLOV_DIMENSION = 30
DEFAULT_DENSE_THRESHOLD = 2000
MAX_HALVINGS = 30

# Lanczos vectors below this norm signal an invariant subspace
_BREAKDOWN = 1e-13


class QuantumState(object):
	"""A normalised amplitude vector over the combined basis at a time."""

	def __init__(self, amplitudes, time=0.0):
		self.amplitudes = np.asarray(amplitudes, dtype=complex)
		self.time = float(time)

	@classmethod
	def product(cls, basis, occupations, well, time=0.0):
		"""The product state |occupations> (x) |well>."""
		amplitudes = np.zeros(basis.dim, dtype=complex)
		amplitudes[2 * basis.rank_bath(occupations) +
		           int(Well.from_label(well))] = 1.0
		return cls(amplitudes, time)

	@property
	def dimension(self):
		return len(self.amplitudes)

	@property
	def norm(self):
		return float(np.linalg.norm(self.amplitudes))

	def normalized(self):
		return self.replace(amplitudes=self.amplitudes / self.norm)

	def overlap(self, other):
		"""|<self|other>|."""
		return abs(np.vdot(self.amplitudes, other.amplitudes))

	def replace(self, **changes):
		values = dict(amplitudes=self.amplitudes, time=self.time)
		values.update(changes)
		return QuantumState(**values)

	def __repr__(self):
		return "QuantumState(dimension={}, time={})".format(self.dimension,
		                                                     self.time)


class Protocol(object):
	"""The switch-on experiment.

	Parameters
	----------
	initial_bath : tuple
		Initial bath occupations.
	initial_well : :py:class:`fockbath.modes.Well` or label
		Initial probe well.
	t_switch, t_end : float
		Coupling switch-on time and end of the run (1/omega0).
	sample_dt : float
		Interval between recorded samples.
	tolerance : float
		Per-step propagation tolerance.
	krylov_dim : int
		Largest Krylov subspace.
	dense_threshold : int
		Bases of at most this dimension are propagated densely.
	method : "auto", "krylov" or "dense"
	"""

	def __init__(self, initial_bath, initial_well="L", t_switch=100.0,
	             t_end=600.0, sample_dt=0.1, tolerance=DEFAULT_TOLERANCE,
	             krylov_dim=DEFAULT_KRYLOV_DIMENSION,
	             dense_threshold=DEFAULT_DENSE_THRESHOLD, method="auto"):
		if not 0.0 <= t_switch <= t_end:
			raise ValueError("need 0 <= t_switch <= t_end")
		if sample_dt <= 0.0:
			raise ValueError("sample_dt must be positive")
		if tolerance <= 0.0:
			raise ValueError("tolerance must be positive")
		if krylov_dim < 2:
			raise ValueError("krylov_dim must be at least 2")
		if method not in ("auto", "krylov", "dense"):
			raise ValueError("unknown propagation method {!r}".format(method))

		self.initial_bath = tuple(int(n) for n in initial_bath)
		self.initial_well = Well.from_label(initial_well)
		self.t_switch = float(t_switch)
		self.t_end = float(t_end)
		self.sample_dt = float(sample_dt)
		self.tolerance = float(tolerance)
		self.krylov_dim = int(krylov_dim)
		self.dense_threshold = int(dense_threshold)
		self.method = method

	def sample_times(self):
		"""Sample times from 0 to t_end inclusive."""
		n = int(round(self.t_end / self.sample_dt))
		times = np.arange(n + 1) * self.sample_dt
		if times[-1] < self.t_end - 1e-9:
			times = np.append(times, self.t_end)
		return np.minimum(times, self.t_end)


################################################################################
# Propagators
################################################################################

def lanczos(matvec, vector, max_dimension, dt=None, tolerance=None):
	"""Lanczos tridiagonalisation with full reorthogonalisation.

	If ``dt`` and ``tolerance`` are given the iteration stops as soon as the
	estimated error of exp(-i H dt) v falls below ``tolerance``.

	Returns
	-------
	(basis, alpha, beta, residual)
		Orthonormal Krylov vectors (rows), diagonal and off-diagonal of the
		tridiagonal projection and the norm of the final residual (0 for an
		invariant subspace).
	"""
	n = len(vector)
	basis = np.zeros((max_dimension, n), dtype=complex)
	alpha = []
	beta = []
	basis[0] = vector / np.linalg.norm(vector)

	residual = 0.0
	for j in range(max_dimension):
		w = matvec(basis[j])
		a = np.vdot(basis[j], w).real
		w = w - a * basis[j]
		if j > 0:
			w = w - beta[-1] * basis[j - 1]
		w = w - basis[:j + 1].T.dot(basis[:j + 1].conj().dot(w))
		alpha.append(a)
		residual = np.linalg.norm(w)

		if residual < _BREAKDOWN:
			return basis[:j + 1], np.array(alpha), np.array(beta), 0.0

		if dt is not None and j >= 1:
			coefficients = _exp_tridiagonal(alpha, beta, dt)
			if residual * abs(coefficients[-1]) < tolerance:
				return basis[:j + 1], np.array(alpha), np.array(beta), residual

		if j + 1 < max_dimension:
			beta.append(residual)
			basis[j + 1] = w / residual

	return basis, np.array(alpha), np.array(beta), residual


def _exp_tridiagonal(alpha, beta, dt):
	"""exp(-i T dt) e_1 for the symmetric tridiagonal T."""
	alpha = np.asarray(alpha, dtype=float)
	if len(alpha) == 1:
		return np.array([np.exp(-1j * alpha[0] * dt)])
	energies, vectors = eigh_tridiagonal(alpha, np.asarray(beta, dtype=float))
	return vectors.dot(np.exp(-1j * energies * dt) * vectors[0].conj())


class KrylovPropagator(object):
	"""exp(-i H dt) v by Lanczos projection with adaptive sub-stepping."""

	def __init__(self, operator, tolerance=DEFAULT_TOLERANCE,
	             max_dimension=DEFAULT_KRYLOV_DIMENSION):
		self.operator = operator
		self.tolerance = tolerance
		self.max_dimension = min(max_dimension, operator.dimension)
		# Largest sub-step known to converge
		self._step = None

	def _try_step(self, vector, dt):
		"""Attempt one step; returns (result, converged)."""
		norm = np.linalg.norm(vector)
		basis, alpha, beta, residual = lanczos(
			self.operator.apply, vector, self.max_dimension, dt,
			self.tolerance / max(norm, 1e-300))
		coefficients = _exp_tridiagonal(alpha, beta[:len(alpha) - 1], dt)
		error = norm * residual * abs(coefficients[-1])
		return norm * basis.T.dot(coefficients), error <= self.tolerance

	def propagate(self, vector, dt):
		if dt == 0.0:
			return np.array(vector, dtype=complex)

		remaining = dt
		step = dt if self._step is None else min(dt, self._step)
		smallest = dt * 2.0**-MAX_HALVINGS
		while remaining > 1e-14 * dt:
			step = min(step, remaining)
			result, converged = self._try_step(vector, step)
			if converged:
				vector = result
				remaining -= step
				self._step = step
			else:
				step /= 2.0
				logging.debug("Krylov step halved to {:.3g}".format(step))
				if step < smallest:
					raise KrylovConvergenceError(
						"no convergence with {} Krylov vectors at step {:.3g}".format(
							self.max_dimension, step))
		return vector


def _real_dot(matrix, vector):
	"""matrix.dot(vector) without promoting a real matrix to complex."""
	if np.iscomplexobj(matrix) or not np.iscomplexobj(vector):
		return matrix.dot(vector)
	return matrix.dot(vector.real) + 1j * matrix.dot(vector.imag)


class DensePropagator(object):
	"""exp(-i H dt) v from a full eigendecomposition (computed once)."""

	def __init__(self, operator):
		self.operator = operator
		self.energies, self.vectors = eigh(operator.toarray())
		self._adjoint = np.ascontiguousarray(self.vectors.conj().T)

	def propagate(self, vector, dt):
		if dt == 0.0:
			return np.array(vector, dtype=complex)
		components = _real_dot(self._adjoint, vector)
		return _real_dot(self.vectors,
		                 np.exp(-1j * self.energies * dt) * components)


def make_propagator(operator, tolerance=DEFAULT_TOLERANCE,
                    krylov_dim=DEFAULT_KRYLOV_DIMENSION,
                    dense_threshold=DEFAULT_DENSE_THRESHOLD, method="auto"):
	"""Choose and build a propagator for ``operator``."""
	if method == "dense" or (method == "auto" and
	                         operator.dimension <= dense_threshold):
		return DensePropagator(operator)
	return KrylovPropagator(operator, tolerance, krylov_dim)


def evolve(state, operator, dt, propagator=None, **kwargs):
	"""Evolve ``state`` under ``operator`` for a time ``dt``.

	Parameters
	----------
	propagator : propagator or None
		Reused if given, else built by :py:func:`make_propagator` with
		``kwargs``.
	"""
	if dt < 0.0:
		raise ValueError("dt must be non-negative")
	if dt == 0.0:
		return state.replace(amplitudes=state.amplitudes.copy())
	if propagator is None:
		propagator = make_propagator(operator, **kwargs)
	return state.replace(amplitudes=propagator.propagate(state.amplitudes, dt),
	                     time=state.time + dt)


################################################################################
# Observables along a run
################################################################################

class Occupations(object):
	"""Mode occupations and probe well probabilities of a state."""

	def __init__(self, modes, values, p_left, p_right):
		self.modes = tuple(modes)
		self.values = tuple(float(v) for v in values)
		self.p_left = float(p_left)
		self.p_right = float(p_right)

	@property
	def total(self):
		return sum(self.values)

	def by_label(self):
		"""{"nL0": <n_L^0>, ...}"""
		return {mode.label: value for mode, value in zip(self.modes, self.values)}

	def __repr__(self):
		return "Occupations({}, pL={:.6g}, pR={:.6g})".format(
			", ".join("{}={:.6g}".format(k, v)
			          for k, v in sorted(self.by_label().items())),
			self.p_left, self.p_right)


def upper_band_weight(state, basis):
	"""Probability that at least one bath atom is in the upper band (0 in
	single-band runs)."""
	columns = [k for k, mode in enumerate(basis.modes) if mode.band == 1]
	if not columns:
		return 0.0
	return float(bath_sector_weight(
		state.amplitudes, basis, lambda kets: kets[:, columns].sum(axis=1) > 0))


def expectations(state, basis):
	"""<n_r^l> for every bath mode and the probe's P_L, P_R."""
	probabilities = (np.abs(state.amplitudes)**2).reshape(basis.dim_bath, 2)
	per_bath = probabilities.sum(axis=1)
	values = basis.kets.T.astype(float).dot(per_bath)
	p_left, p_right = probabilities.sum(axis=0)
	return Occupations(basis.modes, values, p_left, p_right)


# Column order of a protocol time series
SERIES_COLUMNS = ["t", "nL0", "nL1", "nR0", "nR1", "pL", "pR", "purity",
                  "energy"]


def sample(state, basis, operator):
	"""One time-series row for ``state``."""
	occupations = expectations(state, basis)
	row = {"t": state.time,
	       "pL": occupations.p_left,
	       "pR": occupations.p_right,
	       "purity": purity(reduce(state, basis)),
	       "energy": operator.expectation(state.amplitudes)}
	for label, value in occupations.by_label().items():
		row[label] = value / basis.n_atoms
	return row


def run_protocol(spec, protocol, basis=None):
	"""Run the switch-on experiment.

	Returns
	-------
	:py:class:`fockbath.series.TimeSeries`
		Columns :py:data:`SERIES_COLUMNS`; occupations are per atom and the
		upper-band columns are NaN in single-band runs. Metadata records the
		basis and the largest norm drift and upper-band weight.
	"""
	basis = spec.basis() if basis is None else basis

	free = build_free(spec, basis)
	full = build_hamiltonian(spec, basis) if spec.coupling_enabled else free

	options = dict(tolerance=protocol.tolerance,
	               krylov_dim=protocol.krylov_dim,
	               dense_threshold=protocol.dense_threshold,
	               method=protocol.method)
	propagators = {}

	def propagator(coupled):
		if coupled not in propagators:
			propagators[coupled] = make_propagator(full if coupled else free,
			                                       **options)
		return propagators[coupled]

	state = QuantumState.product(basis, protocol.initial_bath,
	                             protocol.initial_well)
	times = protocol.sample_times()
	logging.info("Running protocol: dimension {}, {} samples, switch at "
	             "t={}".format(basis.dim, len(times), protocol.t_switch))

	def hamiltonian_at(t):
		return full if t >= protocol.t_switch else free

	rows = [sample(state, basis, hamiltonian_at(0.0))]
	max_drift = 0.0
	max_upper = upper_band_weight(state, basis)
	report_every = max(1, len(times) // 10)
	for k in range(1, len(times)):
		t_start = state.time
		t_stop = times[k]
		if t_start < protocol.t_switch < t_stop:
			state = evolve(state, free, protocol.t_switch - t_start,
			               propagator(False))
			state.time = protocol.t_switch
			logging.info("Coupling switched on at t={}".format(state.time))
		coupled = state.time >= protocol.t_switch
		state = evolve(state, full if coupled else free, t_stop - state.time,
		               propagator(coupled))
		state.time = t_stop

		max_drift = max(max_drift, abs(state.norm - 1.0))
		max_upper = max(max_upper, upper_band_weight(state, basis))
		rows.append(sample(state, basis, hamiltonian_at(t_stop)))
		if k % report_every == 0:
			logging.info("t={:.1f} purity={:.4f}".format(t_stop, rows[-1]["purity"]))

	metadata = dict(basis.describe())
	metadata["max_norm_drift"] = max_drift
	metadata["max_upper_band_weight"] = max_upper
	return TimeSeries.from_rows(SERIES_COLUMNS, rows, metadata)
