"""Hyperbolic (GPR) heat conduction with a sharp-interface two-phase solver."""

__version__ = "0.1.0"
