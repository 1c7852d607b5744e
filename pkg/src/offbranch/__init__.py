"""Finite laboratory for off-branch almost disjoint families."""

__version__ = "0.1.0"
