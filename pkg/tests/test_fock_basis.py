import pytest

import numpy as np

from fockbath.modes import Well, Mode
from fockbath.fock_basis import (BasisIndex, FockKet, BasisTooLargeError,
                                 ConstraintError, count_kets, enumerate_basis)


@pytest.mark.parametrize("n_atoms,n_modes,expected", [(1, 2, 2),
                                                      (3, 2, 4),
                                                      (1, 4, 4),
                                                      (2, 4, 10),
                                                      (30, 4, 5456),
                                                      (30, 2, 31)])
def test_count_kets(n_atoms, n_modes, expected):
	assert count_kets(n_atoms, n_modes) == expected
	assert enumerate_basis(n_atoms, n_modes).dim == 2 * expected


def test_reference_dimension():
	# The 30-atom, two-band basis with the probe
	assert count_kets(30, 4) * 2 == 10912


def test_ordering():
	basis = enumerate_basis(2, 2)
	assert [tuple(k) for k in basis.kets] == [(0, 2), (1, 1), (2, 0)]

	basis = enumerate_basis(2, 4)
	kets = [tuple(k) for k in basis.kets]
	assert kets[0] == (0, 0, 0, 2)
	assert kets[-1] == (2, 0, 0, 0)
	assert kets == sorted(kets)


@pytest.mark.parametrize("n_atoms,n_modes", [(1, 2), (5, 2), (4, 4), (7, 4)])
def test_rank_unrank_bijection(n_atoms, n_modes):
	basis = enumerate_basis(n_atoms, n_modes)
	seen = set()
	for index in range(basis.dim):
		ket = basis.unrank(index)
		assert basis.rank(ket) == index
		assert sum(ket.occupations) == n_atoms
		seen.add(ket)
	assert len(seen) == basis.dim

	# Vectorised ranking agrees with the row order
	assert np.array_equal(basis.rank_bath_many(basis.kets),
	                      np.arange(basis.dim_bath))


def test_probe_is_fastest_index():
	basis = enumerate_basis(3, 4)
	ket = (1, 0, 2, 0)
	i = basis.rank_bath(ket)
	assert basis.rank(FockKet(ket, Well.left)) == 2 * i
	assert basis.rank(FockKet(ket, "R")) == 2 * i + 1
	assert basis.unrank(2 * i + 1) == FockKet(ket, Well.right)


@pytest.mark.parametrize("ket", [(1, 1, 1), (1, 1, 1, 1), (-1, 2, 1, 1)])
def test_constraint_violations(ket):
	basis = enumerate_basis(3, 4)
	with pytest.raises(ConstraintError):
		basis.rank_bath(ket)
	# Also a ValueError
	with pytest.raises(ValueError):
		basis.check(ket)


@pytest.mark.parametrize("index", [-1, 40])
def test_unrank_out_of_range(index):
	basis = enumerate_basis(3, 4)
	assert basis.dim == 40
	with pytest.raises(IndexError):
		basis.unrank(index)


def test_too_large():
	with pytest.raises(BasisTooLargeError):
		BasisIndex(30, 4, max_dimension=10911)
	assert BasisIndex(30, 4, max_dimension=10912).dim == 10912


@pytest.mark.parametrize("n_atoms,n_modes", [(0, 4), (3, 3), (3, 6)])
def test_invalid(n_atoms, n_modes):
	with pytest.raises(ValueError):
		BasisIndex(n_atoms, n_modes)


def test_occupation_columns():
	basis = enumerate_basis(2, 4)
	assert basis.modes[2] == Mode(Well.right, 0)
	assert np.array_equal(basis.occupation(Mode(Well.right, 0)),
	                      basis.kets[:, 2])
	assert np.array_equal(basis.occupation(2), basis.kets[:, 2])
	assert basis.describe() == {"n_atoms": 2, "n_modes": 4, "dim_bath": 10,
	                            "dim": 20}
