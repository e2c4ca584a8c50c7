"""Simulated quantum query algorithms for approximate selection and counting,
with an LP certifier for approximate polynomial degree."""

__version__ = "0.1.0"
