"""A simple messenger service implementation."""

import messenger_interface
import impl.email_messenger as email_messenger
import impl.SMSMessenger as sms_messenger

class Messenger(messenger_interface.IMessenger):
    """Implements IMessenger for Email and SMS"""
    
    _pimpl = None

    def bind(self, messenger_type):
        """Bind the private implementation instance."""
        self._pimpl = None
        if messenger_type.lower() == "email":
            self._pimpl = email_messenger.EmailMessenger()
        elif messenger_type.lower() == "sms":
            self._pimpl = sms_messenger.SMSMessenger()
        else:
            raise RuntimeError

    def send_message(self, recipient, message):
        """Send a message to a recipient."""
        if not self._pimpl:
            raise RuntimeError
        if self._pimpl:
            self._pimpl.send_message(recipient, message)
