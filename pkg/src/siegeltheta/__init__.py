"""Theta functions on the Siegel upper half-space, the Heisenberg group and the Weil representation."""

__version__ = "0.1.0"
