"""The interface definition for a messenger service."""

import abc

class IMessenger(abc.ABC):
    """The interface for a messenger service."""

    @abc.abstractmethod
    def send_message(self, recipient, message):
        """Send a message to a recipient."""
