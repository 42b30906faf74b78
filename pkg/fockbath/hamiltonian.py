"""
Sparse assembly of the two-band bath Hamiltonian and of the full bath+probe
Hamiltonian.

The bath Hamiltonian is taken literally, with no factors of 1/2::

	H_T = - sum_{r != r', l} J^l b_r^l+ b_r'^l
	      + sum_{r,l} U^l n_r^l (n_r^l - 1) + sum_{r,l} E^l n_r^l
	      + U^01 sum_r sum_{l != l'} (2 n_r^l n_r^l' + b_r^l+ b_r^l+ b_r^l' b_r^l')

The sums over r != r' and l != l' run over both orderings, so they already
contain their Hermitian conjugates. The coupled Hamiltonian adds::

	- J_s sum_{r != r'} a_r+ a_r'
	+ g_I sum_{l,m} sum_{a,b,c,d} C^{l,m}_{a,b,c,d} b_a^l+ b_b^m a_c+ a_d

Operators are assembled ket-by-ket (vectorised over the whole basis) into
compressed-row matrices with sorted columns and no explicit zeros.
"""

import logging

import numpy as np

import scipy.sparse as sp

from fockbath.errors import FockbathError
from fockbath.fock_basis import enumerate_basis
from fockbath.modes import Mode, Well, bath_modes
from fockbath.orbitals import coupling_is_symmetric
from fockbath.series import CSVWriter


class BasisMismatchError(FockbathError):
	"""An operator was requested on a basis built for a different model."""
	pass


class NonHermitianError(FockbathError):
	"""The coupling tensor would give a non-Hermitian Hamiltonian."""
	pass


class DimensionMismatchError(FockbathError, ValueError):
	"""An operator was applied to a vector of the wrong length."""
	pass


class ModelSpec(object):
	"""The lattice model: parameters, atom number and band count.

	In single-band mode (``bands == 1``) U^1 and U^01 are forced to zero and
	the bath has two modes.

	Parameters
	----------
	params : :py:class:`fockbath.orbitals.HubbardParams`
	n_atoms : int
	bands : 1 or 2
	t_switch : float
		Time (1/omega0) at which the probe coupling is switched on.
	coupling_enabled : bool
		If False the g_I terms are never included.
	"""

	def __init__(self, params, n_atoms, bands=2, t_switch=0.0,
	             coupling_enabled=True):
		if bands not in (1, 2):
			raise ValueError("bands must be 1 or 2")
		if n_atoms < 1:
			raise ValueError("n_atoms must be at least 1")
		if t_switch < 0.0:
			raise ValueError("t_switch must be non-negative")

		if bands == 1:
			params = params.replace(u1=0.0, u01=0.0)

		self.params = params
		self.n_atoms = int(n_atoms)
		self.bands = bands
		self.t_switch = float(t_switch)
		self.coupling_enabled = bool(coupling_enabled)

	@property
	def n_modes(self):
		return 2 * self.bands

	@property
	def modes(self):
		return bath_modes(self.bands)

	def replace(self, **changes):
		values = dict(params=self.params, n_atoms=self.n_atoms,
		              bands=self.bands, t_switch=self.t_switch,
		              coupling_enabled=self.coupling_enabled)
		values.update(changes)
		return ModelSpec(**values)

	def basis(self, **kwargs):
		"""Enumerate the basis matching this model."""
		return enumerate_basis(self.n_atoms, self.n_modes, **kwargs)

	def describe(self):
		out = self.params.to_dict()
		out.pop("coupling", None)
		out.update(n_atoms=self.n_atoms, bands=self.bands,
		           t_switch=self.t_switch,
		           coupling_enabled=self.coupling_enabled)
		return out


class SparseOperator(object):
	"""A Hermitian operator stored as a compressed-row sparse matrix."""

	def __init__(self, matrix, hermitian=True):
		matrix = sp.csr_matrix(matrix)
		matrix.sum_duplicates()
		matrix.eliminate_zeros()
		matrix.sort_indices()
		self.matrix = matrix
		self.hermitian = hermitian

	@property
	def dimension(self):
		return self.matrix.shape[0]

	@property
	def nnz(self):
		return self.matrix.nnz

	def apply(self, vector):
		"""Matrix-vector product."""
		vector = np.asarray(vector)
		if vector.shape[0] != self.dimension:
			raise DimensionMismatchError(
				"operator of dimension {} applied to vector of length {}".format(
					self.dimension, vector.shape[0]))
		return self.matrix.dot(vector)

	def expectation(self, vector):
		"""<v|Op|v> (real for a Hermitian operator)."""
		value = np.vdot(vector, self.apply(vector))
		return value.real if self.hermitian else value

	def is_hermitian(self, tolerance=1e-12):
		difference = self.matrix - self.matrix.conj().T
		if difference.nnz == 0:
			return True
		return abs(difference).max() <= tolerance

	def toarray(self):
		return self.matrix.toarray()

	def entries(self):
		"""Iterate over stored (row, column, value) triples in row order."""
		coo = self.matrix.tocoo()
		order = np.lexsort((coo.col, coo.row))
		for k in order:
			yield (int(coo.row[k]), int(coo.col[k]), coo.data[k])

	def dump_csv(self, f, header=None):
		"""Write every stored entry as a ``row,col,value`` CSV (values at full
		precision) after the usual header block."""
		writer = CSVWriter(f, ["row", "col", "value"], header)
		for row, col, value in self.entries():
			writer.write_row(row=row, col=col,
			                 value="{:.17g}".format(np.real(value)))

	def __add__(self, other):
		return SparseOperator(self.matrix + other.matrix,
		                      self.hermitian and other.hermitian)

	def __sub__(self, other):
		return SparseOperator(self.matrix - other.matrix,
		                      self.hermitian and other.hermitian)

	def __neg__(self):
		return SparseOperator(-self.matrix, self.hermitian)

	def __mul__(self, scalar):
		return SparseOperator(self.matrix * scalar,
		                      self.hermitian and np.isreal(scalar))

	__rmul__ = __mul__

	def __repr__(self):
		return "SparseOperator(dimension={}, nnz={})".format(self.dimension,
		                                                      self.nnz)


def apply(op, state):
	"""Apply ``op`` to a state vector or to anything with ``amplitudes``.

	States are returned as the same kind of object they were given as.
	"""
	if hasattr(state, "amplitudes"):
		return state.replace(amplitudes=op.apply(state.amplitudes))
	return op.apply(state)


################################################################################
# Bath one-body and two-body building blocks
################################################################################

def _check_basis(spec, basis):
	if basis.n_atoms != spec.n_atoms or basis.n_modes != spec.n_modes:
		raise BasisMismatchError(
			"basis ({} atoms, {} modes) does not match model ({} atoms, {} "
			"modes)".format(basis.n_atoms, basis.n_modes,
			                spec.n_atoms, spec.n_modes))


def _mode_index(basis, well, band):
	return basis.modes.index(Mode(Well(well), band))


def hopping(basis, i, j):
	"""Bath matrix of b_i+ b_j (mode indices i, j)."""
	kets = basis.kets
	dim = basis.dim_bath
	if i == j:
		return sp.diags(kets[:, i].astype(float), format="csr")

	source = np.nonzero(kets[:, j] > 0)[0]
	target = kets[source].copy()
	amplitude = np.sqrt(target[:, j] * (target[:, i] + 1.0))
	target[:, j] -= 1
	target[:, i] += 1
	rows = basis.rank_bath_many(target)
	return sp.csr_matrix((amplitude, (rows, source)), shape=(dim, dim))


def pair_transfer(basis, i, j):
	"""Bath matrix of b_i+ b_i+ b_j b_j."""
	kets = basis.kets
	dim = basis.dim_bath
	source = np.nonzero(kets[:, j] > 1)[0]
	target = kets[source].copy()
	n_i = target[:, i].astype(float)
	n_j = target[:, j].astype(float)
	amplitude = np.sqrt(n_j * (n_j - 1.0) * (n_i + 1.0) * (n_i + 2.0))
	target[:, j] -= 2
	target[:, i] += 2
	rows = basis.rank_bath_many(target)
	return sp.csr_matrix((amplitude, (rows, source)), shape=(dim, dim))


def build_interband(spec, basis):
	"""The U^01 part of H_T on the bath alone (zero in single-band runs)."""
	_check_basis(spec, basis)
	dim = basis.dim_bath
	matrix = sp.csr_matrix((dim, dim))
	if spec.bands < 2:
		return SparseOperator(matrix)

	u01 = spec.params.u01
	for well in Well:
		i0 = _mode_index(basis, well, 0)
		i1 = _mode_index(basis, well, 1)
		n0 = basis.kets[:, i0].astype(float)
		n1 = basis.kets[:, i1].astype(float)
		# (l, l') = (0, 1) and (1, 0) each contribute 2 n^0 n^1
		matrix = matrix + u01 * (sp.diags(4.0 * n0 * n1) +
		                         pair_transfer(basis, i0, i1) +
		                         pair_transfer(basis, i1, i0))
	return SparseOperator(matrix)


def build_bath_block(spec, basis):
	"""H_T on the bath Hilbert space alone (dimension D_bath)."""
	_check_basis(spec, basis)
	params = spec.params
	kets = basis.kets.astype(float)
	dim = basis.dim_bath

	diagonal = np.zeros(dim)
	matrix = sp.csr_matrix((dim, dim))
	for band in range(spec.bands):
		i_l = _mode_index(basis, Well.left, band)
		i_r = _mode_index(basis, Well.right, band)
		matrix = matrix - params.j[band] * (hopping(basis, i_l, i_r) +
		                                    hopping(basis, i_r, i_l))
		for i in (i_l, i_r):
			n = kets[:, i]
			diagonal += params.u[band] * n * (n - 1.0) + params.e[band] * n

	matrix = matrix + sp.diags(diagonal)
	operator = SparseOperator(matrix) + build_interband(spec, basis)
	logging.debug("Bath Hamiltonian: dimension {}, {} non-zeros".format(
		operator.dimension, operator.nnz))
	return operator


def _on_probe(bath_matrix, probe_matrix):
	"""Tensor product with the probe as the fastest-varying factor."""
	return sp.kron(bath_matrix, probe_matrix, format="csr")


def build_bath(spec, basis):
	"""H_T acting on the combined space (identity on the probe)."""
	block = build_bath_block(spec, basis)
	return SparseOperator(_on_probe(block.matrix, sp.identity(2)))


_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])


def build_coupling(spec, basis, coupling=None, g_i=None):
	"""Probe hopping plus the probe-bath coupling on the combined space.

	Parameters
	----------
	coupling : ndarray or None
		C tensor; defaults to ``spec.params.coupling``.
	g_i : float or None
		Overrides ``spec.params.g_i``. The coupling terms are omitted when the
		effective g_I is zero or ``spec.coupling_enabled`` is False.

	Raises
	------
	NonHermitianError
		If C lacks the exchange symmetry required for Hermiticity.
	"""
	_check_basis(spec, basis)
	params = spec.params
	g_i = params.g_i if g_i is None else g_i
	identity = sp.identity(basis.dim_bath, format="csr")

	matrix = _on_probe(identity, -params.j_s * _SIGMA_X)

	if not spec.coupling_enabled or g_i == 0.0:
		return SparseOperator(matrix)

	coupling = params.coupling if coupling is None else np.asarray(coupling)
	if coupling is None:
		raise ValueError("a coupling tensor is required when g_I is non-zero")
	if not coupling_is_symmetric(coupling):
		raise NonHermitianError("coupling tensor is not exchange symmetric")

	hops = {}
	for l in range(spec.bands):
		for m in range(spec.bands):
			for a in Well:
				for b in Well:
					i = _mode_index(basis, a, l)
					j = _mode_index(basis, b, m)
					if (i, j) not in hops:
						hops[(i, j)] = hopping(basis, i, j)

	for c in Well:
		for d in Well:
			block = sp.csr_matrix((basis.dim_bath, basis.dim_bath))
			for l in range(spec.bands):
				for m in range(spec.bands):
					for a in Well:
						for b in Well:
							weight = coupling[l, m, a, b, c, d]
							if weight != 0.0:
								i = _mode_index(basis, a, l)
								j = _mode_index(basis, b, m)
								block = block + weight * hops[(i, j)]
			probe = np.zeros((2, 2))
			probe[c, d] = 1.0
			matrix = matrix + g_i * _on_probe(block, probe)

	return SparseOperator(matrix)


def build_hamiltonian(spec, basis, coupling=None, g_i=None):
	"""The full Hamiltonian H_T + probe hopping + coupling."""
	return build_bath(spec, basis) + build_coupling(spec, basis, coupling, g_i)


def build_free(spec, basis):
	"""The Hamiltonian before the coupling is switched on (g_I = 0)."""
	return build_bath(spec, basis) + build_coupling(spec, basis, g_i=0.0)


def bath_sector_weight(amplitudes, basis, predicate):
	"""Total probability on bath kets selected by ``predicate(kets) -> mask``."""
	probabilities = np.abs(np.asarray(amplitudes))**2
	per_bath = probabilities.reshape(basis.dim_bath, 2).sum(axis=1)
	return per_bath[predicate(basis.kets)].sum()
