"""Curated tuple with duplicates."""

__all__ = ("one", "two", "one")

one = 1
two = 2
three = 3
