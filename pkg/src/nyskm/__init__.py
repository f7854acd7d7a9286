"""Nystrom-accelerated kernel machines with exact approximation-error analysis."""

__version__ = "0.1.0"
