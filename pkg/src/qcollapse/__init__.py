"""Reduction workbench for multilinear threshold problems and bilinear saddle programs over quantum states."""
__version__ = "0.1.0"
