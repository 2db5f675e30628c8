"""Toolkit for an exactly solvable three-level quantum dissipative system.

Subpackages are imported explicitly (``from qds3 import su3``) so that the
command-line entry point can configure threading caps before any numerical
library is loaded.

Modules
-------
su3            exact U(3) matrix algebra and charge-sector arithmetic
integrability  exchange interaction, scattering matrix, trigonometric
               R-matrix, Yang-Baxter and reparametrisation certificates
fockspace      truncated chiral-fermion Fock spaces and bilinear operators
bosonize       boson-mode construction and finite-window identity checks
qds            three-level system with discretized two-channel ohmic baths:
               assembly, spectral-density checks, Krylov time evolution
cli            batch front door (JSON/CSV, CI exit codes)
"""

__version__ = "0.1.0"

__all__ = ["su3", "integrability", "fockspace", "bosonize", "qds", "cli"]
