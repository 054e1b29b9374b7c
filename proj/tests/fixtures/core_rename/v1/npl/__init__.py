"""Array library, first release."""

from .core.multiarray import array, zeros
from .core.umath import add

__all__ = ["array", "zeros", "add"]
