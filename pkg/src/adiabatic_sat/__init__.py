"""Simulation of quantum adiabatic evolution on random Exact Cover instances."""

__version__ = "0.1.0"
