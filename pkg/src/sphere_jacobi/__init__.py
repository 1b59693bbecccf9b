"""Numerical verification of Jacobi-operator spectral identities on round spheres."""
__version__ = "0.1.0"
