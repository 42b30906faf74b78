import pytest

import numpy as np

from six import StringIO

from fockbath.modes import Well
from fockbath.orbitals import HubbardParams
from fockbath.fock_basis import enumerate_basis
from fockbath.hamiltonian import (ModelSpec, SparseOperator, BasisMismatchError,
                                  NonHermitianError, DimensionMismatchError,
                                  apply, hopping, pair_transfer,
                                  build_interband, build_bath_block, build_bath,
                                  build_coupling, build_hamiltonian, build_free,
                                  bath_sector_weight)


def symmetric_coupling(seed=1):
	"""A random C tensor with the exchange symmetry."""
	c = np.random.RandomState(seed).uniform(-1.0, 1.0, (2, ) * 6)
	return 0.5 * (c + c.transpose(1, 0, 3, 2, 5, 4))


def make_params(**changes):
	values = dict(j0=0.15, j1=0.23, e0=1.37, e1=3.31, u0=0.11, u1=0.07,
	              u01=0.05, j_s=0.1, g_i=0.3, coupling=symmetric_coupling())
	values.update(changes)
	return HubbardParams(**values)


################################################################################
# A slow, literal oracle built from creation/annihilation operators
################################################################################

def _ladder(occupations, ops):
	"""Apply ("+"|"-", mode) operators right to left; (amplitude, occ) or
	None."""
	occupations = list(occupations)
	amplitude = 1.0
	for kind, mode in reversed(ops):
		if kind == "-":
			if occupations[mode] == 0:
				return None
			amplitude *= np.sqrt(occupations[mode])
			occupations[mode] -= 1
		else:
			occupations[mode] += 1
			amplitude *= np.sqrt(occupations[mode])
	return amplitude, tuple(occupations)


def oracle_hamiltonian(spec, basis, bath_only=False):
	params = spec.params
	modes = basis.modes
	index = {m: i for i, m in enumerate(modes)}

	def mode(well, band):
		return index[(Well(well), band)]

	# (coefficient, bath ops, probe ops)
	terms = []
	for band in range(spec.bands):
		for r in Well:
			for s in Well:
				if r != s:
					terms.append((-params.j[band],
					              [("+", mode(r, band)), ("-", mode(s, band))],
					              []))
			n = mode(r, band)
			# U n(n-1) = U b+ b+ b b
			terms.append((params.u[band], [("+", n), ("+", n), ("-", n),
			                               ("-", n)], []))
			terms.append((params.e[band], [("+", n), ("-", n)], []))
	if spec.bands == 2:
		for r in Well:
			for l, lp in ((0, 1), (1, 0)):
				i, j = mode(r, l), mode(r, lp)
				terms.append((2.0 * params.u01,
				              [("+", i), ("-", i), ("+", j), ("-", j)], []))
				terms.append((params.u01,
				              [("+", i), ("+", i), ("-", j), ("-", j)], []))
	if not bath_only:
		for r in Well:
			for s in Well:
				if r != s:
					terms.append((-params.j_s, [], [("+", r), ("-", s)]))
		for l in range(spec.bands):
			for m in range(spec.bands):
				for a in Well:
					for b in Well:
						for c in Well:
							for d in Well:
								terms.append((
									params.g_i * params.coupling[l, m, a, b, c, d],
									[("+", mode(a, l)), ("-", mode(b, m))],
									[("+", c), ("-", d)]))

	dim = basis.dim_bath if bath_only else basis.dim
	matrix = np.zeros((dim, dim))
	for column in range(dim):
		if bath_only:
			occupations, probe = tuple(basis.kets[column]), None
		else:
			ket = basis.unrank(column)
			occupations, probe = ket.occupations, ket.probe
		for coefficient, bath_ops, probe_ops in terms:
			result = _ladder(occupations, bath_ops)
			if result is None:
				continue
			amplitude, new_occupations = result
			if bath_only:
				row = basis.rank_bath(new_occupations)
			else:
				probe_occupation = [0, 0]
				probe_occupation[probe] = 1
				probe_result = _ladder(probe_occupation, probe_ops)
				if probe_result is None:
					continue
				_, new_probe = probe_result
				if max(new_probe) > 1:
					continue
				row = 2 * basis.rank_bath(new_occupations) + new_probe.index(1)
			matrix[row, column] += coefficient * amplitude
	return matrix


@pytest.mark.parametrize("n_atoms,bands", [(1, 2), (2, 2), (3, 2), (4, 1),
                                           (3, 1)])
def test_matches_oracle(n_atoms, bands):
	spec = ModelSpec(make_params(), n_atoms, bands)
	basis = spec.basis()

	hamiltonian = build_hamiltonian(spec, basis)
	assert np.allclose(hamiltonian.toarray(), oracle_hamiltonian(spec, basis),
	                   rtol=0.0, atol=1e-12)

	block = build_bath_block(spec, basis)
	assert np.allclose(block.toarray(),
	                   oracle_hamiltonian(spec, basis, bath_only=True),
	                   rtol=0.0, atol=1e-12)


@pytest.mark.parametrize("n_atoms", [1, 3, 5])
def test_hermitian(n_atoms):
	spec = ModelSpec(make_params(), n_atoms)
	basis = spec.basis()
	for operator in (build_bath(spec, basis), build_coupling(spec, basis),
	                 build_hamiltonian(spec, basis), build_free(spec, basis)):
		assert operator.is_hermitian()
		dense = operator.toarray()
		assert np.allclose(dense, dense.conj().T, rtol=0.0, atol=1e-12)


def test_canonical_storage():
	spec = ModelSpec(make_params(), 3)
	operator = build_hamiltonian(spec, spec.basis())
	matrix = operator.matrix
	assert matrix.has_sorted_indices
	assert np.all(matrix.data != 0.0)
	# No duplicate (row, col) pairs
	assert matrix.nnz == len(set(zip(*matrix.nonzero())))


def test_hopping_elements():
	basis = enumerate_basis(3, 2)
	matrix = hopping(basis, 0, 1).toarray()
	# b_L+ b_R |1, 2> = sqrt(2) sqrt(2) |2, 1>
	src = basis.rank_bath((1, 2))
	dst = basis.rank_bath((2, 1))
	assert matrix[dst, src] == pytest.approx(2.0)
	assert np.count_nonzero(matrix[:, basis.rank_bath((3, 0))]) == 0


def test_pair_transfer_elements():
	basis = enumerate_basis(3, 4)
	matrix = pair_transfer(basis, 0, 1).toarray()
	# b0+ b0+ b1 b1 |1, 2, 0, 0> = sqrt(2*1) sqrt(2*3) |3, 0, 0, 0>
	src = basis.rank_bath((1, 2, 0, 0))
	dst = basis.rank_bath((3, 0, 0, 0))
	assert matrix[dst, src] == pytest.approx(np.sqrt(12.0))


def test_interband_single_band_is_zero():
	spec = ModelSpec(make_params(), 3, bands=1)
	assert build_interband(spec, spec.basis()).nnz == 0


def test_single_band_forces_zero_interband():
	spec = ModelSpec(make_params(), 3, bands=1)
	assert spec.params.u01 == 0.0
	assert spec.params.u1 == 0.0
	assert spec.n_modes == 2


def test_free_hamiltonian_has_no_coupling():
	spec = ModelSpec(make_params(), 2)
	basis = spec.basis()
	free = build_free(spec, basis)
	no_coupling = ModelSpec(make_params(g_i=0.0), 2)
	assert np.allclose(free.toarray(),
	                   build_hamiltonian(no_coupling, basis).toarray())

	disabled = ModelSpec(make_params(), 2, coupling_enabled=False)
	assert np.allclose(build_hamiltonian(disabled, basis).toarray(),
	                   free.toarray())


def test_free_hamiltonian_factorises():
	spec = ModelSpec(make_params(), 2)
	basis = spec.basis()
	block = build_bath_block(spec, basis).toarray()
	probe = np.array([[0.0, -0.1], [-0.1, 0.0]])
	expected = np.kron(block, np.eye(2)) + np.kron(np.eye(basis.dim_bath),
	                                               probe)
	assert np.allclose(build_free(spec, basis).toarray(), expected)


def test_non_hermitian_coupling():
	coupling = np.zeros((2, ) * 6)
	coupling[0, 0, 0, 1, 0, 0] = 1.0
	spec = ModelSpec(make_params(coupling=coupling), 2)
	with pytest.raises(NonHermitianError):
		build_hamiltonian(spec, spec.basis())


def test_missing_coupling():
	spec = ModelSpec(make_params(coupling=None), 2)
	with pytest.raises(ValueError):
		build_coupling(spec, spec.basis())
	# Fine without g_I
	build_coupling(spec, spec.basis(), g_i=0.0)


def test_basis_mismatch():
	spec = ModelSpec(make_params(), 3)
	with pytest.raises(BasisMismatchError):
		build_hamiltonian(spec, enumerate_basis(4, 4))
	with pytest.raises(BasisMismatchError):
		build_bath_block(spec, enumerate_basis(3, 2))


def test_apply():
	spec = ModelSpec(make_params(), 2)
	basis = spec.basis()
	operator = build_hamiltonian(spec, basis)
	vector = np.random.RandomState(0).normal(size=basis.dim)
	assert np.allclose(apply(operator, vector), operator.toarray().dot(vector))
	with pytest.raises(DimensionMismatchError):
		operator.apply(np.zeros(basis.dim + 1))


def test_sparse_operator_arithmetic_and_dump():
	a = SparseOperator(np.array([[1.0, 2.0], [2.0, 0.0]]))
	b = SparseOperator(np.eye(2))
	assert np.allclose((a + b).toarray(), [[2.0, 2.0], [2.0, 1.0]])
	assert np.allclose((a - b).toarray(), [[0.0, 2.0], [2.0, -1.0]])
	assert np.allclose((-a).toarray(), -a.toarray())
	assert np.allclose((2.0 * a).toarray(), 2.0 * a.toarray())
	assert a.nnz == 3
	assert a.expectation(np.array([1.0, 1.0])) == pytest.approx(5.0)

	s = StringIO()
	a.dump_csv(s, {"n_atoms": 1})
	lines = s.getvalue().splitlines()
	assert lines[0] == "# n_atoms: 1"
	assert lines[1].startswith("# units: ")
	assert lines[2:] == ["row,col,value", "0,0,1", "0,1,2", "1,0,2"]


def test_bath_sector_weight():
	basis = enumerate_basis(2, 2)
	amplitudes = np.zeros(basis.dim)
	amplitudes[2 * basis.rank_bath((2, 0))] = np.sqrt(0.25)
	amplitudes[2 * basis.rank_bath((1, 1)) + 1] = np.sqrt(0.75)
	weight = bath_sector_weight(amplitudes, basis,
	                            lambda kets: kets[:, 0] >= 1)
	assert weight == pytest.approx(1.0)
	weight = bath_sector_weight(amplitudes, basis,
	                            lambda kets: kets[:, 0] == 2)
	assert weight == pytest.approx(0.25)


def test_model_spec_validation():
	params = make_params()
	with pytest.raises(ValueError):
		ModelSpec(params, 3, bands=3)
	with pytest.raises(ValueError):
		ModelSpec(params, 0)
	with pytest.raises(ValueError):
		ModelSpec(params, 3, t_switch=-1.0)
	assert ModelSpec(params, 3).replace(n_atoms=5).n_atoms == 5
