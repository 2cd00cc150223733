"""Weil-Petersson volumes and figure-eight geodesic moments."""

__version__ = "0.1.0"
