"""Messenger backends."""
