"""Shared exception types. CLI maps ValidationError -> exit 2, IoError -> exit 3."""


class IntersegError(Exception):
    """Base class for all package errors."""


class ValidationError(IntersegError):
    """Invalid argument, precondition violation, or malformed in-memory data."""


class IoError(IntersegError):
    """Malformed or unreadable file payloads."""
