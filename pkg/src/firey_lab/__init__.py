"""Numerical laboratory for the non-homogeneous Firey problem."""

__version__ = "0.1.0"
