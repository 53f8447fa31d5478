"""Compact Takagi-Sugeno fuzzy regression models from descriptor tables."""

__version__ = "0.1.0"
