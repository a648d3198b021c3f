"""Exact and numerical checks for non-associative magnetic translations."""

__version__ = "0.1.0"
