"""Refined Kato constants for harmonic forms on flat Riemannian and Kähler spaces."""

__version__ = "0.1.0"
