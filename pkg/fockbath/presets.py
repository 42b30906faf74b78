"""
Reference lattice parameter sets.

The tunnelling and on-site values are fixed numbers (they are also what
:py:func:`fockbath.orbitals.derive_parameters` yields for the default trap);
the interaction strengths scale with the atom number. The coupling tensor C
is only ever given as an overlap integral, so it is evaluated once from the
orbital solver on the default trap and cached.
"""

import logging

from fockbath.orbitals import (DEFAULT_PROBE_TRAP, HubbardParams,
                               derive_parameters)


J0 = 0.153
J1 = 0.226
E0 = 1.37
E1 = 3.31
J_S = 0.1

# Interaction scales, quoted per atom
U0_N = 2.0
U1_RATIO = 0.75
U01_RATIO = 0.5
G_I_N = 2.0

# Probe-to-bath mass ratio
MASS_RATIO = 2.0


_coupling_cache = {}


def default_coupling(mass_ratio=MASS_RATIO,
                     probe_trap=DEFAULT_PROBE_TRAP):
	"""The C tensor of the default trap (computed once per convention)."""
	key = (mass_ratio, probe_trap)
	if key not in _coupling_cache:
		logging.info("Evaluating coupling tensor for the default trap "
		             "(mass ratio {}, {} probe trap)".format(mass_ratio,
		                                                     probe_trap))
		_, params = derive_parameters(mass_ratio=mass_ratio,
		                              probe_trap=probe_trap)
		_coupling_cache[key] = params.coupling
	return _coupling_cache[key].copy()


def reference_params(n_atoms, u0_n=U0_N, u1_ratio=U1_RATIO,
                     u01_ratio=U01_RATIO, g_i_n=G_I_N, j_s=J_S, coupling=None,
                     **overrides):
	"""The reference parameter set for ``n_atoms`` bath atoms.

	Parameters
	----------
	n_atoms : int
	u0_n, g_i_n : float
		U^0 * N and g_I * N.
	u1_ratio, u01_ratio : float
		U^1 / U^0 and U^01 / U^0.
	coupling : ndarray or None
		C tensor; the default-trap tensor if None.
	**overrides
		Any :py:class:`fockbath.orbitals.HubbardParams` field given directly
		(e.g. ``j0=0.2``) replaces the computed value.
	"""
	if n_atoms < 1:
		raise ValueError("n_atoms must be at least 1")
	u0 = u0_n / float(n_atoms)
	params = HubbardParams(
		j0=J0, j1=J1, e0=E0, e1=E1,
		u0=u0, u1=u1_ratio * u0, u01=u01_ratio * u0,
		j_s=j_s, g_i=g_i_n / float(n_atoms),
		coupling=default_coupling() if coupling is None else coupling)
	if overrides:
		params = params.replace(**overrides)
	return params
