"""Periodic standing waves of the cubic NLS: elliptic profiles, a normalized
gradient flow, and spectral stability of the linearization."""

__version__ = "0.1.0"
