"""Quantum Max-Cut relaxations, rounding algorithms and ratio certificates."""

__version__ = "0.1.0"
