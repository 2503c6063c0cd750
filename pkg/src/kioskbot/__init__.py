"""Desk-scale software twin of a screen-reaching touch bot system."""

__version__ = "0.1.0"
