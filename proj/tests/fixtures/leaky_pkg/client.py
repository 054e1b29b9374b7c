"""Client code reaching past the public surface."""

from .widget import Widget
from .impl import _widget


def peek(config):
    w = Widget(config)
    return w._impl.status()


def raw(config):
    return _widget._WidgetImpl(config)
