"""Numerical verification of curvature identities on S-manifolds."""

__version__ = "0.1.0"
