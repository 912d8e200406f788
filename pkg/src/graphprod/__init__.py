"""Random permutation models for graph products, traffic moments and cyclotomic determinants."""

__version__ = "0.1.0"
