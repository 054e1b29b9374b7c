"""Deprecated alias of the private core."""
