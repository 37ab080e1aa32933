"""Numerical toolkit for Riesz bases of exponentials and their critical Sobolev indices."""

__version__ = "0.1.0"
