import pytest

import numpy as np

from fockbath.errors import FitError
from fockbath.fock_basis import BasisTooLargeError
from fockbath.modes import Mode, Well
from fockbath.presets import reference_params
from fockbath.series import TimeSeries
from fockbath.hamiltonian import ModelSpec, build_bath_block, build_interband
from fockbath.chaos import (WindowTooNarrowError, SampleSizeError,
                            GaussianFit, BIMODALITY_THRESHOLD, eigensolve_bath,
                            band_sectors, eigenstate_profile, profile_columns,
                            energy_window, mean_level_spacing,
                            mean_squared_coupling, offdiag_occupation_stats,
                            diagonal_ensemble, integrated_autocorrelation_time,
                            bimodality_coefficient, gaussian_fit,
                            occupation_histogram, histogram_columns)


def make_spec(n_atoms, u01_ratio=0.5):
	params = reference_params(n_atoms, u01_ratio=u01_ratio,
	                      coupling=np.zeros((2, ) * 6))
	return ModelSpec(params, n_atoms)


def decompose(spec, sectors=False):
	basis = spec.basis()
	block = build_bath_block(spec, basis)
	return basis, eigensolve_bath(block,
	                              band_sectors(basis) if sectors else None)


@pytest.fixture(scope="module")
def chaotic():
	return decompose(make_spec(8))


@pytest.fixture(scope="module")
def regular():
	return decompose(make_spec(8, u01_ratio=0.0), sectors=True)


################################################################################
# Diagonalisation
################################################################################

def test_single_atom_spectrum():
	# One atom: two independent double wells, E = e_l -+ j_l
	spec = make_spec(1)
	basis, decomposition = decompose(spec)
	p = spec.params
	assert decomposition.dimension == 4
	assert np.allclose(decomposition.energies,
	                   sorted([p.e0 - p.j0, p.e0 + p.j0,
	                           p.e1 - p.j1, p.e1 + p.j1]))
	# Mode order L0, L1, R0, R1: the band is the mode index mod 2
	assert np.allclose(decomposition.diagonal,
	                   [p.e[list(ket).index(1) % 2] for ket in basis.kets])


def test_decomposition_accuracy(chaotic):
	basis, decomposition = chaotic
	assert decomposition.dimension == basis.dim_bath
	assert decomposition.residual() < 1e-8
	assert decomposition.orthonormality_error() < 1e-8
	assert np.all(np.diff(decomposition.energies) >= 0.0)
	# Trace invariance
	total = np.sum(decomposition.diagonal)
	assert np.sum(decomposition.energies) == pytest.approx(total, rel=1e-6)


def test_sectors_do_not_mix(regular):
	basis, decomposition = regular
	sectors = band_sectors(basis)
	assert decomposition.residual() < 1e-8
	assert decomposition.orthonormality_error() < 1e-8
	for a in range(decomposition.dimension):
		support = np.abs(decomposition.vectors[:, a]) > 1e-12
		assert len(np.unique(sectors[support])) == 1

	# Same spectrum as diagonalising everything at once
	_, plain = decompose(make_spec(8, u01_ratio=0.0))
	assert np.allclose(plain.energies, decomposition.energies, atol=1e-9)


def test_band_sectors():
	basis = make_spec(2).basis()
	sectors = band_sectors(basis)
	for ket, sector in zip(basis.kets, sectors):
		assert sector == ket[0] + ket[2]


def test_cap():
	spec = make_spec(3)
	basis = spec.basis()
	with pytest.raises(BasisTooLargeError):
		eigensolve_bath(build_bath_block(spec, basis), cap=10)


################################################################################
# Profiles
################################################################################

def test_profile(chaotic):
	basis, decomposition = chaotic
	profile = eigenstate_profile(decomposition, 17)
	assert profile.index == 17
	assert np.sum(np.abs(profile.components)**2) == pytest.approx(1.0,
	                                                               abs=1e-10)
	assert 1.0 <= profile.participation_ratio <= basis.dim_bath
	assert profile.energy == decomposition.energies[17]
	assert profile.energy_width > 0.0
	assert (decomposition.diagonal.min() <= profile.energy_mean <=
	        decomposition.diagonal.max())


def test_profile_selection(chaotic):
	_, decomposition = chaotic
	middle = decomposition.dimension // 2
	assert eigenstate_profile(decomposition).index == middle
	energy = decomposition.energies[40]
	assert eigenstate_profile(decomposition, energy=energy).energy == energy


def test_profile_columns(chaotic):
	_, decomposition = chaotic
	columns = profile_columns(eigenstate_profile(decomposition, 3))
	assert list(columns) == ["ket", "eps", "component", "weight"]
	assert np.all(np.diff(columns["eps"]) >= 0.0)
	assert np.sum(columns["weight"]) == pytest.approx(1.0)


def test_interband_coupling_spreads_eigenstates(chaotic, regular):
	def mean_pr(decomposition):
		return np.mean([eigenstate_profile(decomposition, a).participation_ratio
		                for a in range(decomposition.dimension)])
	assert mean_pr(chaotic[1]) > mean_pr(regular[1])


################################################################################
# Off-diagonal statistics
################################################################################

def test_energy_window(chaotic):
	_, decomposition = chaotic
	center = decomposition.energies[80]
	window = energy_window(decomposition, center, 50)
	assert window[0] <= center <= window[1]
	assert len(decomposition.window_indices(window)) >= 50


def test_mean_level_spacing():
	energies = np.array([0.0, 1.0, 3.0, 10.0])
	assert mean_level_spacing(energies, (0.0, 3.0)) == 1.5
	with pytest.raises(WindowTooNarrowError):
		mean_level_spacing(energies, (4.0, 9.0))


def test_mean_squared_coupling():
	spec = make_spec(2)
	interband = build_interband(spec, spec.basis())
	dense = interband.toarray()
	assert mean_squared_coupling(interband) == pytest.approx(
		np.trace(dense.dot(dense)) / len(dense))


def test_offdiag_stats(chaotic):
	basis, decomposition = chaotic
	spec = make_spec(8)
	_, reference = decompose(make_spec(8, u01_ratio=0.0), sectors=True)
	window = energy_window(decomposition, decomposition.energies[80], 60)
	stats = offdiag_occupation_stats(
		decomposition, basis, Mode(Well.left, 1), window,
		reference_energies=reference.energies,
		interband=build_interband(spec, basis), min_states=60)

	assert stats.mode == "nL1"
	assert stats.n_states >= 60
	assert stats.n_pairs == stats.n_states * (stats.n_states - 1) // 2
	assert stats.std > 0.0
	assert abs(stats.mean) < 3.0 * stats.standard_error
	assert 0.0 <= stats.diagonal_mean <= 8.0
	assert stats.level_spacing > 0.0
	assert stats.delta_squared > 0.0
	assert stats.spacing_sq_over_delta_sq == pytest.approx(
		stats.level_spacing**2 / stats.delta_squared)
	assert stats.delta_sq_over_spacing == pytest.approx(
		stats.delta_squared / stats.level_spacing)


def test_offdiag_occupation_without_interband_coupling(chaotic, regular):
	def coupled_fraction(basis, decomposition):
		occupation = basis.occupation(Mode(Well.left, 1)).astype(float)
		matrix = decomposition.expectation_matrix(occupation)
		values = matrix[np.triu_indices(decomposition.dimension, k=1)]
		return np.mean(np.abs(values) > 1e-8)

	# Without U01 the occupation only connects states of one band sector
	assert coupled_fraction(*regular) < 0.15
	assert coupled_fraction(*chaotic) > 2 * coupled_fraction(*regular)


def test_offdiag_stats_without_scales(chaotic):
	basis, decomposition = chaotic
	window = energy_window(decomposition, decomposition.energies[50], 30)
	stats = offdiag_occupation_stats(decomposition, basis, 0, window,
	                                 min_states=30)
	assert stats.mode == "nL0"
	assert stats.level_spacing is None
	assert stats.spacing_sq_over_delta_sq is None


def test_window_too_narrow(chaotic):
	basis, decomposition = chaotic
	window = energy_window(decomposition, decomposition.energies[50], 10)
	with pytest.raises(WindowTooNarrowError):
		offdiag_occupation_stats(decomposition, basis, 0, window)


def test_diagonal_ensemble(chaotic):
	basis, decomposition = chaotic
	# An eigenstate is its own long-time average
	vector = decomposition.vectors[:, 12]
	averages = diagonal_ensemble(decomposition, basis, vector)
	assert sum(averages.values()) == pytest.approx(1.0)
	for i, mode in enumerate(basis.modes):
		expected = np.sum(np.abs(vector)**2 * basis.kets[:, i]) / basis.n_atoms
		assert averages[mode.label] == pytest.approx(expected)

	ket = np.zeros(basis.dim_bath)
	ket[basis.rank_bath((8, 0, 0, 0))] = 1.0
	averages = diagonal_ensemble(decomposition, basis, ket)
	assert sum(averages.values()) == pytest.approx(1.0)
	# Left-right symmetric trap
	assert averages["nL0"] == pytest.approx(averages["nR0"], abs=0.05)


################################################################################
# Histograms
################################################################################

def test_autocorrelation_time():
	assert integrated_autocorrelation_time(np.ones(10)) == 1.0

	rng = np.random.RandomState(0)
	phi = 0.9
	values = np.zeros(100000)
	for i in range(1, len(values)):
		values[i] = phi * values[i - 1] + rng.normal()
	expected = (1.0 + phi) / (1.0 - phi)
	assert integrated_autocorrelation_time(values) == pytest.approx(expected,
	                                                                rel=0.3)


def test_bimodality_coefficient():
	rng = np.random.RandomState(1)
	assert bimodality_coefficient(rng.normal(size=20000)) == pytest.approx(
		1.0 / 3.0, abs=0.02)
	assert bimodality_coefficient(
		np.sin(np.linspace(0.0, 40.0 * np.pi, 4000))) > BIMODALITY_THRESHOLD


def test_gaussian_sample_passes():
	rng = np.random.RandomState(2)
	fit = gaussian_fit(0.41 + 0.07 * rng.normal(size=5000))
	assert fit.mean == pytest.approx(0.41, abs=0.01)
	assert fit.variance == pytest.approx(0.0049, rel=0.1)
	assert fit.unimodal
	assert fit.n_samples == 5000
	assert fit.effective_samples <= fit.n_samples * 1.01
	assert fit.dof >= 1


def test_sinusoid_is_not_gaussian():
	fit = gaussian_fit(0.5 + 0.1 * np.sin(np.linspace(0.0, 40.0 * np.pi, 4000)))
	assert not fit.unimodal
	assert not fit.is_gaussian
	assert fit.to_dict()["is_gaussian"] is False


def test_histogram_density():
	rng = np.random.RandomState(3)
	fit = gaussian_fit(rng.normal(size=1000))
	assert np.sum(fit.density * np.diff(fit.bin_edges)) == pytest.approx(1.0)
	columns = histogram_columns(fit)
	assert list(columns) == ["bin_center", "density", "gaussian"]
	assert len(columns["bin_center"]) == len(fit.density)
	assert np.all(columns["gaussian"] > 0.0)


def test_histogram_errors():
	with pytest.raises(SampleSizeError):
		gaussian_fit(np.arange(10.0))
	with pytest.raises(FitError):
		gaussian_fit(np.full(500, 0.3))
	with pytest.raises(ValueError):
		GaussianFit(0.0, 0.0, 1, 1.0, 0.0, 1, 1.0, 0.0, np.zeros(2), np.zeros(1))


def test_occupation_histogram():
	rng = np.random.RandomState(4)
	t = np.arange(1000.0)
	series = TimeSeries([("t", t), ("nL0", 0.4 + 0.05 * rng.normal(size=1000))])
	fit = occupation_histogram(series, Mode(Well.left, 0), window=(100.0, 999.0))
	assert fit.n_samples == 900
	assert fit.mean == pytest.approx(0.4, abs=0.01)
	assert occupation_histogram(series, "nL0").n_samples == 1000
