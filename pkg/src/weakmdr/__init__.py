"""Weak-measurement test of measurement-disturbance relations on a photonic qubit."""

__version__ = "0.1.0"
