"""Projective joint spectra, component decomposition and invariant-subspace tests."""

__version__ = "0.1.0"
