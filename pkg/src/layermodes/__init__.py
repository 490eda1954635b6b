"""Spectral solver and estimate checks for layered-media operators -c(y) Laplacian."""
__version__ = "0.1.0"
