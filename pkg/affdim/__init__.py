"""Dimension theory of planar self-affine sets and measures."""

__version__ = "0.1.0"
