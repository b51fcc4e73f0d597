"""Pseudo-spectral solvers for the scaled Boussinesq and primitive equations on a periodic box."""

__version__ = "0.1.0"
