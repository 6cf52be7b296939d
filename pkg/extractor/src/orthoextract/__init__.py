"""Embedding extraction companion for the orthographic-variant pipeline."""

__version__ = "0.1.0"
