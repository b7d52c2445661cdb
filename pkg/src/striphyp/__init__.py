"""Weighted analytic functions on strips."""
__version__ = "0.1.0"
