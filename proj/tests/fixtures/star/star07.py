"""Tuple unpacking and chained assignment."""

a, (b, _c) = 1, (2, 3)
d = e = 4
f: int = 5
g: str
