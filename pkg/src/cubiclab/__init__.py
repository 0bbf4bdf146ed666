"""Desk-scale experiments around the circle method for cubic hypersurfaces."""

from .poly import CubicPolynomial, parse_polynomial, format_polynomial

__all__ = ["CubicPolynomial", "parse_polynomial", "format_polynomial"]
__version__ = "0.1.0"
