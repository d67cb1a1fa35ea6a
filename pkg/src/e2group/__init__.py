"""Euclidean 2-group state-sum model: geometry, symbols and state sums."""

__version__ = "0.1.0"
