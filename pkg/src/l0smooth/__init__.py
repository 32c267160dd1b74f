"""Exact l0 robustness certificates for classifiers smoothed by discrete noise."""

__version__ = "0.1.0"
