"""Stagewise workbench for c.e. orbit equivalence relations."""

__version__ = "0.1.0"
