"""Operator-class classification for matrices, weighted shifts and block Toeplitz truncations."""

__version__ = "0.1.0"
