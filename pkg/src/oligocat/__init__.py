"""Exact computations with measures on finitely-powered regular categories."""
__version__ = "0.1.0"
