"""Deprecated shim; the implementation moved to npl._core."""

from .._core.multiarray import array, zeros
