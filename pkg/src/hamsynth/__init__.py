"""Synthesis of many-body Hamiltonians from two-body interactions under noise."""

__version__ = "0.1.0"
