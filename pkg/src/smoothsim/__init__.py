"""Simulation engine for smoothed online learning with an unknown base measure."""

__version__ = "0.1.0"
