"""Exact verification kernel and catalog for FLD superintegrable systems in 3D."""

__version__ = "0.1.0"
