"""Quantum Fisher information of probes for quartic-momentum gravity corrections."""

__version__ = "0.1.0"
