"""Discrete flat, CMC-1 and linear Weingarten surfaces in hyperbolic 3-space."""

__version__ = "0.1.0"
