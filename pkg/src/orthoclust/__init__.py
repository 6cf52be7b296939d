"""Orthographic-variant embedding clustering and evaluation toolkit."""

__version__ = "0.1.0"
