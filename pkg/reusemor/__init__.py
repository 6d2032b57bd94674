"""Projection-based model order reduction with reusable SPAI preconditioners."""

__version__ = "0.1.0"
