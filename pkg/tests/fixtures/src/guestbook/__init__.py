"""Guestbook demo package."""
