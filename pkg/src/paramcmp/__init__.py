"""Fit two regression models on one dataset and test whether their coefficients agree."""

__version__ = "0.1.0"
