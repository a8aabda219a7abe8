"""Exact computations with polynomial superdomains, Weil functors and supergroups."""

__version__ = "0.1.0"
