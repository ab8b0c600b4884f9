"""Curation and evaluation toolkit for text-rich image instruction datasets."""

__version__ = "0.1.0"
