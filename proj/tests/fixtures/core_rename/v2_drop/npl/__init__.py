"""Array library, second release with a private core."""

from ._core.multiarray import array, zeros

__all__ = ["array", "zeros"]
