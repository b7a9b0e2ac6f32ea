"""Numerical laboratory for Anderson models whose single-site law is a Cauchy convolution."""

__version__ = "0.1.0"
