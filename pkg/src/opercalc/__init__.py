"""Exact workbench for opers, generalized B-opers and their jet-bundle data."""

__version__ = "0.1.0"
