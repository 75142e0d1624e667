"""Exact calculators for involutive rings, Witt vectors, and equivariant
homotopy groups built from them."""

__version__ = "0.1.0"
