"""Widget internals."""


class _WidgetImpl:
    def __init__(self, config):
        self._state = "initialized"
        self._config = config

    def start(self):
        self._state = "running"

    def stop(self):
        self._state = "stopped"

    def status(self):
        return {"state": self._state, "config": dict(self._config)}
