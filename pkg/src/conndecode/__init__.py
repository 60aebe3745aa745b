"""Decoding models over connectivity data: nested cross-validation, linear
learners, permutation significance and exportable reports."""

__version__ = "0.1.0"
