"""Span-level error annotation toolkit for machine-generated text."""

__version__ = "0.1.0"
