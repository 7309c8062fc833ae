"""Metric mean dimension of interval maps built from horseshoes."""

__version__ = "0.1.0"
