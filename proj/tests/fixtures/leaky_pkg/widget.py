"""Public widget wrapper."""

from .impl._widget import _WidgetImpl


class Widget:
    """Stable handle for a widget."""

    def __init__(self, config):
        self._impl = _WidgetImpl(config)

    def start(self):
        return self._impl.start()

    def stop(self):
        return self._impl.stop()

    def status(self):
        return self._impl.status()
