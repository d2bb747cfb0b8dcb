"""Exact Cartan-model computations for homogeneous spaces G/K."""

__version__ = "0.1.0"
