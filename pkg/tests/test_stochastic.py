import pytest

import numpy as np

from collections import namedtuple

from fockbath.observables import purity
from fockbath.stochastic import (StepTooCoarseError, MissingFitError,
                                 NoiseSpec, MeanFieldParams, CHUNK_SIZE,
                                 noise_scale, mean_field_from_microscopic,
                                 theta_analytic, dephasing_rate,
                                 phase_model_density, phase_model_purity,
                                 chunk_rng, ou_path, simulate_dephasing)


Fit = namedtuple("Fit", "mean variance")


def make_mean_field(j_s=0.1, j0=0.0):
	return MeanFieldParams(j0, 0.3, 0.3, 0.0, 0.0, 0.0, j_s)


@pytest.mark.parametrize("value,reading,sigma", [(0.1, "std", 0.1),
                                                 (0.01, "variance", 0.1),
                                                 (0.0, "variance", 0.0)])
def test_noise_scale(value, reading, sigma):
	assert noise_scale(value, reading) == pytest.approx(sigma)


def test_noise_scale_errors():
	with pytest.raises(ValueError):
		noise_scale(-1.0, "variance")
	with pytest.raises(ValueError):
		noise_scale(0.1, "range")


class TestNoiseSpec(object):

	def test_default_correlation_time(self):
		assert NoiseSpec(0.1).tau_c == pytest.approx(10.0)
		assert NoiseSpec(0.0).tau_c == np.inf
		assert NoiseSpec(0.1, tau_c=3.0).tau_c == 3.0

	@pytest.mark.parametrize("kwargs", [dict(sigma=-0.1),
	                                    dict(sigma=0.1, tau_c=0.0),
	                                    dict(sigma=0.1, ensemble=0),
	                                    dict(sigma=0.1, channels="both")])
	def test_invalid(self, kwargs):
		with pytest.raises(ValueError):
			NoiseSpec(**kwargs)

	def test_describe(self):
		description = NoiseSpec(0.1, seed=4).describe()
		assert description["seed"] == 4
		assert description["rng"] == "Philox"


class TestMeanField(object):

	def test_properties(self):
		mf = MeanFieldParams(0.02, 0.1, 0.3, 0.0, 1e-4, 3e-4, 0.1)
		assert mf.eps0 == pytest.approx(0.2)
		assert mf.var_eps == pytest.approx(2e-4)
		assert mf.j_s_effective == pytest.approx(0.08)
		assert mf.to_dict()["j_s_effective"] == pytest.approx(0.08)

	def test_negative_variance(self):
		with pytest.raises(ValueError):
			MeanFieldParams(0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.1)

	def test_from_microscopic(self):
		coupling = np.zeros((2, ) * 6)
		coupling[0, 0, 0, 0, 0, 1] = 0.5   # n_L0 induces L-R tunnelling
		coupling[1, 1, 1, 1, 0, 0] = 2.0   # n_R1 shifts the left level
		fits = {"nL0": Fit(0.4, 0.01), "nL1": Fit(0.1, 0.0),
		        "nR0": Fit(0.4, 0.01), "nR1": Fit(0.1, 0.004)}
		mf = mean_field_from_microscopic(coupling, 0.2, fits, 0.1)
		assert mf.j0 == pytest.approx(0.2 * 0.5 * 0.4)
		assert mf.var_j == pytest.approx((0.2 * 0.5)**2 * 0.01)
		assert mf.eps_left == pytest.approx(0.2 * 2.0 * 0.1)
		assert mf.var_eps_left == pytest.approx((0.2 * 2.0)**2 * 0.004)
		assert mf.eps_right == 0.0

		# Linear in the occupations
		doubled = {k: Fit(2.0 * f.mean, f.variance) for k, f in fits.items()}
		assert mean_field_from_microscopic(coupling, 0.2, doubled, 0.1).j0 == \
			pytest.approx(2.0 * mf.j0)

		# Per-atom fits rescale to counts
		counts = mean_field_from_microscopic(coupling, 0.2, fits, 0.1,
		                                     n_atoms=30)
		assert counts.j0 == pytest.approx(30.0 * mf.j0)
		assert counts.var_j == pytest.approx(900.0 * mf.var_j)

	def test_missing_fit(self):
		with pytest.raises(MissingFitError):
			mean_field_from_microscopic(np.zeros((2, ) * 6), 0.2,
			                            {"nL0": Fit(0.4, 0.01)}, 0.1)
		# Single band only needs the lower level
		fits = {"nL0": Fit(0.5, 0.01), "nR0": Fit(0.5, 0.01)}
		mean_field_from_microscopic(np.zeros((2, ) * 6), 0.2, fits, 0.1,
		                            bands=1)


################################################################################
# Analytic phase variance
################################################################################

def test_theta_short_times():
	noise = NoiseSpec(0.1, tau_c=10.0)
	t = np.array([0.0, 0.01, 0.1])
	theta = theta_analytic(noise, t)
	assert theta.exact[0] == 0.0
	assert np.allclose(theta.exact[1:], 2.0 * 0.01 * t[1:]**2, rtol=1e-2)


def test_theta_long_times():
	noise = NoiseSpec(0.1, tau_c=10.0)
	theta = theta_analytic(noise, [50.0, 200.0])
	assert np.allclose(theta.exact, theta.asymptote, rtol=1e-3)
	assert np.allclose(theta.linear, 2.0 * 0.01 * 10.0 * np.array([50., 200.]))
	assert np.all(theta.exact < theta.linear)


def test_theta_errors_and_silence():
	with pytest.raises(ValueError):
		theta_analytic(NoiseSpec(0.1), [-1.0])
	theta = theta_analytic(NoiseSpec(0.0), [0.0, 10.0])
	assert np.all(theta.exact == 0.0)


def test_dephasing_rate():
	assert dephasing_rate(NoiseSpec(0.1, tau_c=10.0)) == pytest.approx(0.2)
	# Default tau_c = 1/sigma gives 2 sigma
	assert dephasing_rate(NoiseSpec(0.05)) == pytest.approx(0.1)


def test_phase_model_density():
	times = np.linspace(0.0, 50.0, 11)
	theta = theta_analytic(NoiseSpec(0.1), times).exact
	densities = phase_model_density(5.0, theta, times)
	assert len(densities) == len(times)
	for rho, expected in zip(densities, phase_model_purity(theta)):
		assert rho.is_valid()
		assert purity(rho) == pytest.approx(expected)
	assert purity(densities[0]) == pytest.approx(1.0)
	assert densities[0].p_left == pytest.approx(1.0)

	with pytest.raises(ValueError):
		phase_model_density(0.0, theta, times)


################################################################################
# Monte Carlo
################################################################################

def test_ou_statistics():
	noise = NoiseSpec(0.2, tau_c=5.0)
	path = ou_path(noise, 100, 0.5, chunk_rng(1, 0), size=20000)
	assert path.shape == (20000, 101)
	assert np.var(path[:, 0]) == pytest.approx(0.04, rel=0.05)
	assert np.var(path[:, -1]) == pytest.approx(0.04, rel=0.05)
	# <x(0) x(t)> = sigma^2 exp(-2t/tau_c)
	for lag in (2, 10):
		correlation = np.mean(path[:, 0] * path[:, lag])
		expected = 0.04 * np.exp(-2.0 * lag * 0.5 / 5.0)
		assert correlation == pytest.approx(expected, abs=0.002)


def test_chunk_streams_differ():
	a = chunk_rng(3, 0).standard_normal(4)
	assert np.array_equal(a, chunk_rng(3, 0).standard_normal(4))
	assert not np.array_equal(a, chunk_rng(3, 1).standard_normal(4))
	assert not np.array_equal(a, chunk_rng(4, 0).standard_normal(4))


def test_silent_noise_gives_rabi_oscillation():
	series = simulate_dephasing(make_mean_field(j0=0.02), NoiseSpec(0.0,
	                            ensemble=10), t_end=40.0, dt=0.1,
	                            sample_every=10)
	assert len(series) == 41
	assert np.allclose(series["pL_mean"], np.cos(0.08 * series.t)**2,
	                   atol=1e-10)
	assert np.allclose(series["purity"], 1.0)
	assert np.allclose(series["offdiag_abs"], 1.0)
	assert np.allclose(series["coherence_abs"], 1.0)


def test_common_noise_is_a_global_phase():
	noise = NoiseSpec(0.1, ensemble=200, channels="common")
	series = simulate_dephasing(make_mean_field(), noise, t_end=20.0, dt=0.5)
	assert np.allclose(series["purity"], 1.0, atol=1e-10)
	assert np.allclose(series["pL_mean"], np.cos(0.1 * series.t)**2,
	                   atol=1e-10)


def test_step_too_coarse():
	with pytest.raises(StepTooCoarseError):
		simulate_dephasing(make_mean_field(), NoiseSpec(0.1, tau_c=1.0),
		                   t_end=10.0, dt=0.2)
	with pytest.raises(ValueError):
		simulate_dephasing(make_mean_field(), NoiseSpec(0.1), t_end=10.0,
		                   dt=0.0)


def test_independent_of_worker_count():
	noise = NoiseSpec(0.1, seed=9, ensemble=2 * CHUNK_SIZE + 17)
	serial = simulate_dephasing(make_mean_field(), noise, 10.0, 0.5)
	threaded = simulate_dephasing(make_mean_field(), noise, 10.0, 0.5,
	                              workers=3)
	for name in serial.names:
		assert np.array_equal(serial[name], threaded[name])

	other = simulate_dephasing(make_mean_field(), NoiseSpec(0.1, seed=10,
	                           ensemble=noise.ensemble), 10.0, 0.5)
	assert not np.array_equal(serial["offdiag_abs"], other["offdiag_abs"])


def test_ensemble_matches_theta():
	noise = NoiseSpec(0.1, tau_c=10.0, seed=1, ensemble=10000)
	series = simulate_dephasing(make_mean_field(), noise, t_end=40.0, dt=0.25,
	                            sample_every=4)
	assert series.metadata["rng"] == "Philox"
	assert series["offdiag_abs"][0] == 1.0
	for t in np.linspace(4.0, 40.0, 10):
		k = int(np.argmin(np.abs(series.t - t)))
		measured = series["offdiag_abs"][k]
		error = series["offdiag_stderr"][k]
		assert abs(measured - series["offdiag_predicted"][k]) < 3.0 * error
		theta = series["theta_exact"][k]
		assert series["coherence_abs"][k] == pytest.approx(np.exp(-0.5 * theta),
		                                                   abs=0.05)
		assert series["purity"][k] == pytest.approx(phase_model_purity(theta),
		                                            abs=0.05)
	assert np.all(np.diff(series["theta_exact"]) > 0.0)


@pytest.mark.parametrize("g_i", [0.05, 0.1, 0.2])
def test_rate_proportional_to_coupling(g_i):
	# sigma scales with g_I and tau_c = 1/sigma, so the slope 2 sigma does too
	rate = dephasing_rate(NoiseSpec(0.03 * g_i / 0.05))
	assert rate == pytest.approx(2.0 * 0.03 * g_i / 0.05)
