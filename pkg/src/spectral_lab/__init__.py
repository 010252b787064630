"""Numerical laboratory for finite spectral triples and the fermion-extended spectral action."""

__version__ = "0.1.0"
