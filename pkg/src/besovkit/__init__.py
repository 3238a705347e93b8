"""Besov-type smoothness norms, Hajlasz gradients and rearrangements on finite metric measure spaces."""

__version__ = "0.1.0"
