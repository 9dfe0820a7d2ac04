"""Combinatorial and spectral tools for repelling systems of puzzle pieces."""
__version__ = "0.1.0"
