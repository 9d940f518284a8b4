"""Twisting constructions for graded algebras, checked by exact truncated linear algebra."""

__version__ = "0.1.0"
