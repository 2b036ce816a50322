"""Ergodic optimization for beta-transformations and expanding circle maps."""

__version__ = "0.1.0"
