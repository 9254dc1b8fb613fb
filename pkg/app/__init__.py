"""Numerical toolkit for charged liquid drops: Riesz and logarithmic equilibrium measures, capacities and shape stability."""

__version__ = "1.0.0"
