"""Attention-equivalent image-to-text replacement via canonical correlation analysis."""

__version__ = "0.1.0"
