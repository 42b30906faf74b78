"""
Single-particle orbitals of the split harmonic trap and the lattice parameters
derived from them.

All quantities use oscillator units of the bath species: lengths in l_ho,
energies in hbar*omega0, so the single-particle Hamiltonian of a particle
``mass_ratio`` times heavier than a bath atom is::

	h = -1/(2 mass_ratio) d^2/dx^2 + V(x)

discretised with second-order central differences on a uniform grid with
zero (Dirichlet) boundaries. All integrals use the trapezoid rule.
"""

import logging

from collections import namedtuple

import numpy as np

from scipy.integrate import trapezoid
from scipy.linalg import eigh_tridiagonal, LinAlgError

from fockbath.errors import NumericalError
from fockbath.modes import Well


class GridTooNarrowError(NumericalError):
	"""A wavefunction has not decayed by the edge of the grid."""
	pass


class EigensolveError(NumericalError):
	"""The tridiagonal eigensolver did not converge."""
	pass


class DoubletError(NumericalError):
	"""The low-lying spectrum does not split into well-separated doublets."""
	pass


# Largest wavefunction amplitude tolerated at either end of the grid.
BOUNDARY_TOLERANCE = 1e-6

# Probe trap conventions. "shared": the probe sees V_dw exactly.
# "same_frequency": the probe sees the same trap frequency, so its harmonic
# term is m_s/m times stronger.
PROBE_TRAPS = ("shared", "same_frequency")

# Only the same-frequency trap gives a probe tunnelling close to J_s = 0.1
# for a probe twice as heavy as a bath atom
DEFAULT_PROBE_TRAP = "same_frequency"


class Grid1D(object):
	"""A uniform 1D grid, positions in units of l_ho."""

	def __init__(self, x_min=-8.0, x_max=8.0, n_points=2048):
		if n_points < 3:
			raise ValueError("n_points must be at least 3")
		if not x_max > x_min:
			raise ValueError("x_max must be greater than x_min")

		self.x_min = float(x_min)
		self.x_max = float(x_max)
		self.n_points = int(n_points)

	@property
	def spacing(self):
		return (self.x_max - self.x_min) / (self.n_points - 1)

	@property
	def x(self):
		return np.linspace(self.x_min, self.x_max, self.n_points)

	@property
	def symmetric(self):
		"""True if the grid is mirror-symmetric about x = 0."""
		return abs(self.x_min + self.x_max) < 1e-12 * (self.x_max - self.x_min)

	def refined(self, factor=2):
		"""A grid over the same range with ``factor`` times as many points."""
		return Grid1D(self.x_min, self.x_max, self.n_points * factor)

	def __repr__(self):
		return "Grid1D({!r}, {!r}, {!r})".format(self.x_min, self.x_max,
		                                         self.n_points)


class TrapPotential(object):
	"""A harmonic trap split by a Gaussian barrier::

		V(x) = harmonic_scale * x^2 / 2 + V0 exp(-x^2 / (2 sigma_b^2))

	``harmonic_scale`` is 1 for the bath species; it is only changed when a
	heavier probe is placed in a trap of the same frequency.
	"""

	def __init__(self, barrier_height=10.0, barrier_width=0.1,
	             harmonic_scale=1.0):
		if barrier_height < 0.0:
			raise ValueError("barrier_height must be non-negative")
		if barrier_width <= 0.0:
			raise ValueError("barrier_width must be positive")
		if harmonic_scale <= 0.0:
			raise ValueError("harmonic_scale must be positive")

		self.barrier_height = float(barrier_height)
		self.barrier_width = float(barrier_width)
		self.harmonic_scale = float(harmonic_scale)

	def __call__(self, x):
		x = np.asarray(x, dtype=float)
		return (0.5 * self.harmonic_scale * x**2 +
		        self.barrier_height *
		        np.exp(-x**2 / (2.0 * self.barrier_width**2)))

	def for_probe(self, mass_ratio, probe_trap=DEFAULT_PROBE_TRAP):
		"""The potential felt by a probe ``mass_ratio`` times heavier."""
		if probe_trap == "shared":
			return self
		elif probe_trap == "same_frequency":
			return TrapPotential(self.barrier_height, self.barrier_width,
			                     self.harmonic_scale * mass_ratio)
		else:
			raise ValueError("probe_trap must be one of {}, not {!r}".format(
				", ".join(PROBE_TRAPS), probe_trap))

	def right_minimum(self, grid):
		"""Position of the potential minimum on the right-hand side."""
		x = grid.x
		right = x > 0.0
		return x[right][np.argmin(self(x[right]))]


class Spectrum(object):
	"""Lowest eigenstates of a single-particle Hamiltonian on a grid.

	Iterating yields ``(energy, wavefunction)`` pairs in ascending energy.
	"""

	def __init__(self, energies, wavefunctions, grid, potential, mass_ratio):
		self.energies = energies
		self.wavefunctions = wavefunctions
		self.grid = grid
		self.potential = potential
		self.mass_ratio = mass_ratio

	def __len__(self):
		return len(self.energies)

	def __iter__(self):
		return iter(zip(self.energies, self.wavefunctions))

	def __getitem__(self, i):
		return (self.energies[i], self.wavefunctions[i])

	def apply_hamiltonian(self, psi):
		"""Apply the discretised single-particle Hamiltonian to ``psi``."""
		return apply_hamiltonian(psi, self.grid, self.potential,
		                         self.mass_ratio)


def _tridiagonal(grid, potential, mass_ratio):
	"""Diagonal and off-diagonal of the finite-difference Hamiltonian."""
	kinetic = 1.0 / (2.0 * mass_ratio * grid.spacing**2)
	diagonal = 2.0 * kinetic + potential(grid.x)
	off_diagonal = np.full(grid.n_points - 1, -kinetic)
	return diagonal, off_diagonal


def apply_hamiltonian(psi, grid, potential, mass_ratio=1.0):
	"""Apply h = -1/(2 mass_ratio) d^2/dx^2 + V to a grid function."""
	diagonal, off_diagonal = _tridiagonal(grid, potential, mass_ratio)
	out = diagonal * psi
	out[:-1] += off_diagonal * psi[1:]
	out[1:] += off_diagonal * psi[:-1]
	return out


def normalize(psi, grid):
	"""Scale ``psi`` so that its trapezoid-rule norm is 1."""
	return psi / np.sqrt(trapezoid(psi**2, grid.x))


def solve_eigenstates(potential, grid, mass_ratio=1.0, n_states=5):
	"""Find the lowest ``n_states`` eigenstates of a particle in ``potential``.

	Parameters
	----------
	potential : :py:class:`TrapPotential`
	grid : :py:class:`Grid1D`
	mass_ratio : float
		Particle mass in units of the bath-atom mass.
	n_states : int

	Returns
	-------
	:py:class:`Spectrum`
		Energies ascending, wavefunctions normalised and mutually orthogonal.

	Raises
	------
	GridTooNarrowError
		If any requested wavefunction is larger than BOUNDARY_TOLERANCE at the
		edge of the grid.
	EigensolveError
		If the eigensolver fails.
	"""
	if mass_ratio <= 0.0:
		raise ValueError("mass_ratio must be positive")
	if not 1 <= n_states <= grid.n_points:
		raise ValueError("n_states must be between 1 and the number of grid "
		                 "points")

	diagonal, off_diagonal = _tridiagonal(grid, potential, mass_ratio)
	try:
		energies, vectors = eigh_tridiagonal(diagonal, off_diagonal,
		                                     select="i",
		                                     select_range=(0, n_states - 1))
	except LinAlgError as e:
		raise EigensolveError("tridiagonal eigensolve failed: {}".format(e))

	wavefunctions = []
	for n in range(n_states):
		psi = normalize(vectors[:, n], grid)
		edge = max(abs(psi[0]), abs(psi[-1]))
		if edge > BOUNDARY_TOLERANCE:
			raise GridTooNarrowError(
				"state {} has amplitude {:.3g} at the grid boundary; widen the "
				"grid beyond [{}, {}]".format(n, edge, grid.x_min, grid.x_max))
		wavefunctions.append(psi)

	logging.debug("Lowest single-particle energies (mass ratio {}): {}".format(
		mass_ratio, ", ".join("{:.5f}".format(e) for e in energies)))

	return Spectrum(energies, wavefunctions, grid, potential, mass_ratio)


def _localize_band(spectrum, band):
	"""Combine one doublet into (phi_L, phi_R)."""
	grid = spectrum.grid
	x = grid.x
	e_sym, sym = spectrum[2 * band]
	e_anti, anti = spectrum[2 * band + 1]

	# The doublet must be narrow compared with the gap to its neighbours
	splitting = e_anti - e_sym
	gaps = []
	if 2 * band + 2 < len(spectrum):
		gaps.append(spectrum.energies[2 * band + 2] - e_anti)
	if band > 0:
		gaps.append(e_sym - spectrum.energies[2 * band - 1])
	if not gaps:
		raise DoubletError("need at least one state above band {} to identify "
		                   "its doublet".format(band))
	if splitting >= 0.5 * min(gaps):
		raise DoubletError(
			"band {} splitting {:.4f} is not small compared with the gap "
			"{:.4f}".format(band, splitting, min(gaps)))

	# Orient the antisymmetric state so that sym + anti lives on the right
	right = x > 0.0
	if trapezoid(sym[right] * anti[right], x[right]) < 0.0:
		anti = -anti

	phi_left = normalize((sym - anti) / np.sqrt(2.0), grid)
	phi_right = normalize((sym + anti) / np.sqrt(2.0), grid)

	# Sign: phi_R >= 0 at the right-well minimum
	i_min = np.argmin(np.abs(x - spectrum.potential.right_minimum(grid)))
	reference = phi_right[i_min]
	if abs(reference) < 1e-3 * np.max(np.abs(phi_right)):
		reference = phi_right[np.argmax(np.abs(phi_right) * right)]
	if reference < 0.0:
		phi_left, phi_right = -phi_left, -phi_right

	return (phi_left, phi_right)


class OrbitalSet(object):
	"""Localised orbitals of both species on a common grid.

	Attributes
	----------
	bath : [(phi_L, phi_R), ...]
		One pair per band.
	probe : (psi_L, psi_R)
	bath_spectrum, probe_spectrum : :py:class:`Spectrum`
		The eigenstates the orbitals were built from (needed to apply each
		species' single-particle Hamiltonian).
	"""

	def __init__(self, bath, probe, bath_spectrum, probe_spectrum):
		self.bath = bath
		self.probe = probe
		self.bath_spectrum = bath_spectrum
		self.probe_spectrum = probe_spectrum

	@property
	def grid(self):
		return self.bath_spectrum.grid

	@property
	def mass_ratio(self):
		return self.probe_spectrum.mass_ratio

	@property
	def bands(self):
		return len(self.bath)

	def bath_orbital(self, well, band):
		return self.bath[band][Well(well)]

	def probe_orbital(self, well):
		return self.probe[Well(well)]

	def overlap(self, f, g):
		return trapezoid(f * g, self.grid.x)

	def columns(self):
		"""(name, values) pairs for tabulating every orbital on the grid."""
		columns = [("x", self.grid.x)]
		for band in range(self.bands):
			for well in Well:
				columns.append(("phi_{}{}".format(well.label, band),
				                self.bath_orbital(well, band)))
		for well in Well:
			columns.append(("psi_{}".format(well.label), self.probe_orbital(well)))
		return columns


def localize(bath_spectrum, probe_spectrum=None, bands=2):
	"""Build localised orbitals from doublets of eigenstates.

	States 2l and 2l+1 of each spectrum form band l; the localised orbitals
	are phi_L = (phi_sym - phi_anti)/sqrt(2) and phi_R = (phi_sym +
	phi_anti)/sqrt(2) with phi_R positive at the right-well minimum.

	If no probe spectrum is given the probe orbitals are the band-0 bath
	orbitals (a probe of equal mass).
	"""
	bath = [_localize_band(bath_spectrum, band) for band in range(bands)]
	if probe_spectrum is None:
		probe_spectrum = bath_spectrum
	probe = _localize_band(probe_spectrum, 0)
	return OrbitalSet(bath, probe, bath_spectrum, probe_spectrum)


class HubbardParams(object):
	"""Lattice parameters of the bath and of its coupling to the probe.

	Energies are in hbar*omega0. ``coupling`` is the overlap tensor
	C[l, m, alpha, beta, gamma, delta] = int phi_alpha^l phi_beta^m psi_gamma
	psi_delta dx with wells indexed by :py:class:`fockbath.modes.Well`; it may
	be None when no probe coupling is needed.
	"""

	FIELDS = ("j0", "j1", "e0", "e1", "u0", "u1", "u01", "j_s", "g_i")

	def __init__(self, j0, j1, e0, e1, u0, u1, u01, j_s, g_i, coupling=None):
		self.j0 = float(j0)
		self.j1 = float(j1)
		self.e0 = float(e0)
		self.e1 = float(e1)
		self.u0 = float(u0)
		self.u1 = float(u1)
		self.u01 = float(u01)
		self.j_s = float(j_s)
		self.g_i = float(g_i)

		if coupling is not None:
			coupling = np.array(coupling, dtype=float)
			if coupling.shape != (2, 2, 2, 2, 2, 2):
				raise ValueError("coupling tensor must have shape (2,)*6")
		self.coupling = coupling

	@property
	def j(self):
		return (self.j0, self.j1)

	@property
	def e(self):
		return (self.e0, self.e1)

	@property
	def u(self):
		return (self.u0, self.u1)

	def replace(self, **changes):
		"""A copy with some fields changed."""
		values = {name: getattr(self, name) for name in self.FIELDS}
		values["coupling"] = self.coupling
		values.update(changes)
		return HubbardParams(**values)

	def to_dict(self):
		out = {name: getattr(self, name) for name in self.FIELDS}
		if self.coupling is not None:
			out["coupling"] = self.coupling.tolist()
		return out

	def __repr__(self):
		return "HubbardParams({})".format(", ".join(
			"{}={:.6g}".format(name, getattr(self, name)) for name in self.FIELDS))


def coupling_is_symmetric(coupling, tolerance=1e-12):
	"""True if C^{l,m}_{a,b,c,d} == C^{m,l}_{b,a,d,c} (Hermiticity for real
	orbitals)."""
	coupling = np.asarray(coupling)
	return np.allclose(coupling, coupling.transpose(1, 0, 3, 2, 5, 4),
	                   rtol=0.0, atol=tolerance)


def hubbard_params(orbitals, g, g_i, mass_ratio=None):
	"""Evaluate every lattice parameter from a set of localised orbitals.

	Tunnelling integrals carry the sign that makes the ``-J b^dag b`` term of
	the lattice Hamiltonian reproduce the doublet splitting, i.e. J = -<L|h|R>.

	Parameters
	----------
	orbitals : :py:class:`OrbitalSet`
	g : float
		Bath contact interaction strength (hbar*omega0*l_ho).
	g_i : float
		Probe-bath coupling; stored as is, C is a pure overlap.
	mass_ratio : float or None
		Overrides the probe mass ratio used for J_s.
	"""
	grid = orbitals.grid
	x = grid.x

	def matrix_element(spectrum, f, g_, mass=None):
		hg = apply_hamiltonian(g_, grid, spectrum.potential,
		                       spectrum.mass_ratio if mass is None else mass)
		return trapezoid(f * hg, x)

	bath = orbitals.bath_spectrum
	j = []
	e = []
	u = []
	for band in range(orbitals.bands):
		phi_l, phi_r = orbitals.bath[band]
		j.append(-matrix_element(bath, phi_l, phi_r))
		e.append(0.5 * (matrix_element(bath, phi_l, phi_l) +
		                matrix_element(bath, phi_r, phi_r)))
		u.append(g * trapezoid(phi_l**4, x))
	while len(j) < 2:
		j.append(0.0)
		e.append(0.0)
		u.append(0.0)

	if orbitals.bands > 1:
		u01 = g * trapezoid(orbitals.bath[0][Well.left]**2 *
		                    orbitals.bath[1][Well.left]**2, x)
	else:
		u01 = 0.0

	psi_l, psi_r = orbitals.probe
	j_s = -matrix_element(orbitals.probe_spectrum, psi_l, psi_r, mass_ratio)

	coupling = np.zeros((2,) * 6)
	for l in range(orbitals.bands):
		for m in range(orbitals.bands):
			for a in Well:
				for b in Well:
					for c in Well:
						for d in Well:
							coupling[l, m, a, b, c, d] = trapezoid(
								orbitals.bath[l][a] * orbitals.bath[m][b] *
								orbitals.probe[c] * orbitals.probe[d], x)

	params = HubbardParams(j[0], j[1], e[0], e[1], u[0], u[1], u01, j_s, g_i,
	                       coupling)
	logging.info("Derived lattice parameters: {!r}".format(params))
	return params


def coupling_for_interaction(orbitals, u0):
	"""The bath contact strength g for which U^0 equals ``u0``."""
	phi_l = orbitals.bath[0][Well.left]
	return u0 / trapezoid(phi_l**4, orbitals.grid.x)


DerivedModel = namedtuple("DerivedModel", ["orbitals", "params"])


def derive_parameters(potential=None, grid=None, mass_ratio=2.0, g=0.0,
                      g_i=0.0, probe_trap=DEFAULT_PROBE_TRAP, bands=2):
	"""Solve both species, localise and evaluate all lattice parameters.

	Returns
	-------
	:py:class:`DerivedModel`
		(orbitals, params)
	"""
	potential = TrapPotential() if potential is None else potential
	grid = Grid1D() if grid is None else grid

	bath = solve_eigenstates(potential, grid, 1.0, 2 * bands + 1)
	probe = solve_eigenstates(potential.for_probe(mass_ratio, probe_trap), grid,
	                          mass_ratio, 3)
	orbitals = localize(bath, probe, bands)
	return DerivedModel(orbitals, hubbard_params(orbitals, g, g_i))


def probe_tunneling_conventions(potential=None, grid=None, mass_ratio=2.0):
	"""J_s under each probe-trap convention, {convention: J_s}."""
	potential = TrapPotential() if potential is None else potential
	grid = Grid1D() if grid is None else grid

	out = {}
	for probe_trap in PROBE_TRAPS:
		spectrum = solve_eigenstates(potential.for_probe(mass_ratio, probe_trap),
		                             grid, mass_ratio, 3)
		psi_l, psi_r = _localize_band(spectrum, 0)
		out[probe_trap] = -trapezoid(psi_l * spectrum.apply_hamiltonian(psi_r),
		                             grid.x)
	return out
