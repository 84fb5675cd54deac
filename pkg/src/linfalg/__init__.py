"""Exact computer algebra for curved L-infinity algebras over nilpotent dg algebras."""

__version__ = "0.1.0"
