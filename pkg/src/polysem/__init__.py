"""Arithmetic circuits for polynomial encodings of distributions over binary
variables, with transformations between their semantics."""

__version__ = "0.1.0"
