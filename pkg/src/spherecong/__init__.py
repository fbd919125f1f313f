"""Superconformal surfaces, central sphere congruences and their dual surfaces."""
__version__ = "0.1.0"
