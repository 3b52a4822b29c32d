"""Numerical laboratory for nonlocal host-pathogen coevolution models."""

__version__ = "0.1.0"
