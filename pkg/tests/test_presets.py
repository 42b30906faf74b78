import pytest

import numpy as np

from mock import patch

from fockbath import presets
from fockbath.orbitals import coupling_is_symmetric


@pytest.mark.parametrize("n_atoms", [12, 30])
def test_interactions_scale_with_atom_number(n_atoms):
	params = presets.reference_params(n_atoms)
	assert params.u0 * n_atoms == pytest.approx(presets.U0_N)
	assert params.u1 == pytest.approx(presets.U1_RATIO * params.u0)
	assert params.u01 == pytest.approx(presets.U01_RATIO * params.u0)
	assert params.g_i * n_atoms == pytest.approx(presets.G_I_N)
	assert params.j == (presets.J0, presets.J1)
	assert params.e == (presets.E0, presets.E1)
	assert params.j_s == presets.J_S


def test_default_coupling_is_symmetric():
	coupling = presets.default_coupling()
	assert coupling.shape == (2, ) * 6
	assert coupling_is_symmetric(coupling)
	# Callers get a copy
	coupling[...] = 0.0
	assert np.any(presets.default_coupling() != 0.0)


def test_default_coupling_is_cached():
	presets.default_coupling()
	with patch("fockbath.presets.derive_parameters") as derive:
		presets.default_coupling()
		assert not derive.called


def test_overrides():
	coupling = np.zeros((2, ) * 6)
	params = presets.reference_params(30, u01_ratio=0.0, coupling=coupling,
	                                  j0=0.2)
	assert params.u01 == 0.0
	assert params.j0 == 0.2
	assert np.all(params.coupling == 0.0)


def test_invalid_atom_number():
	with pytest.raises(ValueError):
		presets.reference_params(0)
