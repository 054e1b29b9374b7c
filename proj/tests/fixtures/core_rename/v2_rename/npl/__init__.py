"""Array library, second release with a private core."""

from ._core.multiarray import array, zeros
from ._core.umath import add

__all__ = ["array", "zeros", "add"]
