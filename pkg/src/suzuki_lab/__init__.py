"""Suzuki Lab: verification experiments for the Suzuki groups Sz(q)."""

__version__ = "0.1.0"
