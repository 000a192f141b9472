"""Hyperplanes of Grassmannians defined by alternating forms over finite fields."""

__version__ = "0.1.0"
