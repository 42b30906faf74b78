from setuptools import setup, find_packages


# Defines __version__
with open("fockbath/version.py", "r") as f:
	exec(f.read())


setup(
	name="fockbath",
	version=__version__,
	packages=find_packages(exclude=["tests", "tests.*"]),

	# Metadata for PyPi
	description="Simulations of a two-level probe decohering in a finite "
	            "bosonic heat bath of ultracold atoms in a double well.",
	long_description = (
		"See the documentation in docs/ for a description of the model, the "
		"experiments and the ``fockbath`` command."
	),
	license="GPLv2",

	# Requirements
	install_requires=[
		# For Python 2/3 cross-compatibility
		"six", "enum-compat",
		# For sparse Hamiltonians, eigensolvers and fits
		"numpy", "scipy",
		# For rendering plots
		"cairocffi",
	],

	# Scripts
	entry_points={
		"console_scripts": [
			"fockbath = fockbath.scripts.cli:main",
		],
	}
)
