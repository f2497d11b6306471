"""Moment-method null controllability for 1-D parabolic and dispersive systems."""

__version__ = "0.1.0"
