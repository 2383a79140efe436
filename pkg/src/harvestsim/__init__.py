"""Deterministic simulator of light-harvesting, super-capacitor BLE sensor nodes."""

__version__ = "0.1.0"
