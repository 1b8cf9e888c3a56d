"""Spectral boundary integral methods for suspensions of spheres."""
__version__ = "0.1.0"
