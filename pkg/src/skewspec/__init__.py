"""Skew-shift CMV and Schrodinger operators."""

__version__ = "0.1.0"
