"""Characteristic multipliers of periodic orbits via invariant hypersurfaces."""

__version__ = "0.1.0"
