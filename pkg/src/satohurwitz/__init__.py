"""Exact windowed models of Sato Grassmannians for branched covers of curves."""

__version__ = "0.1.0"
