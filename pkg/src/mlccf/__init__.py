"""Multilevel coset coding for compute-and-forward on the two-way relay channel."""

__version__ = "0.1.0"
