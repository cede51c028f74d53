"""Exact computations with generalized flags, taut couples and finitary
Lie algebras over a symbolic model of countable-dimensional paired spaces,
with a finite-dimensional oracle for independent verification."""

__version__ = "0.1.0"
