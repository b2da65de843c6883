"""Numerical experiments on index and nullity of bubbling harmonic maps into S^2."""

__version__ = "0.1.0"
