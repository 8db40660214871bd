"""Simulation toolkit for optical power limiters in QKD systems."""
__version__ = "0.1.0"
