"""Minimizing-movement gradient flows of first Laplacian eigenvalues of planar shapes."""

__version__ = "0.1.0"
