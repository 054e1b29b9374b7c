"""A package that keeps its implementation private."""

from .widget import Widget

__all__ = ["Widget"]
