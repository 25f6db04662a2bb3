"""Torus-symmetry detection for domains in C^n from Bergman-space monomial moments."""

__version__ = "0.1.0"
