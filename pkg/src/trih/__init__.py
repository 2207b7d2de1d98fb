"""Tropical intersection homology of fan cycles with exact rational arithmetic."""

__version__ = "0.1.0"
