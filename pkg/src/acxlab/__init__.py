"""Numerical almost complex analysis in local coordinates."""

__version__ = "0.1.0"
