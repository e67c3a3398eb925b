"""Exponent algebra, lattice counting and Monte Carlo checks for probabilistic scaling."""
__version__ = "0.1.0"
