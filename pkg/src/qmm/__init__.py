"""Simulation and verification of memory-made unitary dynamics of one qubit."""

__version__ = "0.1.0"
