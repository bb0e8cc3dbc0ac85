"""Spectral analytics for the dipole Pauli-Fierz model and the Nelson model.

Submodules
----------
numerics    quadrature, principal values, special functions, eigen tools
fock        truncated bosonic Fock space
symplectic  Bogoliubov transformations on truncated Fock spaces
dispersion  dispersion function and running effective mass
gse         effective mass and ground-state energy formulas
lattice     momentum-lattice harmonic approximation
binding     Birman-Schwinger critical masses and coupling windows
nelson      Nelson effective potentials and cluster stability
cli         command-line front end
"""

from . import errors

__version__ = "0.1.0"

__all__ = ["errors", "__version__"]
