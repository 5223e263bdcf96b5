"""Exact lifting-property computations over finitely presented Z- and Z/N-modules."""

__version__ = "0.1.0"
