"""Exception hierarchy shared by all subtok modules.

The CLI maps these onto process exit codes; see `subtok.cli`.
"""

from __future__ import annotations


class SubtokError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SubtokError, ValueError):
    """Invalid parameter or option combination (CLI exit code 2)."""


class IngestError(SubtokError, ValueError):
    """Malformed input text, e.g. invalid UTF-8 (CLI exit code 1)."""

    def __init__(self, message: str, byte_offset: int | None = None):
        super().__init__(message)
        self.byte_offset = byte_offset


class PairingError(SubtokError, ValueError):
    """Reference/hypothesis files cannot be paired (CLI exit code 3)."""

    def __init__(self, message: str, line_number: int | None = None):
        super().__init__(message)
        self.line_number = line_number


class UnknownTokenError(SubtokError, KeyError):
    """A token is not part of the model vocabulary (CLI exit code 3)."""

    def __init__(self, token: str):
        super().__init__(f"unknown token: {token!r}")
        self.token = token


class ModelFormatError(SubtokError, ValueError):
    """A model file is malformed or of the wrong kind (CLI exit code 3)."""


class TrainingError(SubtokError, RuntimeError):
    """Training cannot proceed on the given inputs (CLI exit code 3)."""
