"""Gaussian-copula performance analysis of fluid antenna systems."""
__version__ = "0.1.0"
