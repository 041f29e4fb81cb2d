"""Jet-based differential geometry checks for Einstein metrics, almost Hermitian
structures and special holonomy constructions."""

__version__ = "0.1.0"
