"""Exact engine for twisted correlation maps and the universal trace on linear symplectic orbifolds."""

__version__ = "0.1.0"
