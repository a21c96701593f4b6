"""Exact solver for symmetric 2-cocycle equations on rational cones."""

__version__ = "0.1.0"
