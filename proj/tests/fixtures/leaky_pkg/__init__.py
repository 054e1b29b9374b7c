"""A package with one boundary violation per rule."""

from .widget import Widget
from .tools import helper

__all__ = ["Widget", "helper", "ghost"]
