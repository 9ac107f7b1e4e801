"""Polynomial Killing fields and loop group tools for blowups of CMC surfaces."""
__version__ = "0.1.0"
