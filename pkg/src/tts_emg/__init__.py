"""Temporal-to-Spatial CNNs for surface-EMG hand movement classification."""

__version__ = "0.1.0"
