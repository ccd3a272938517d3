from __future__ import annotations


class HermapError(Exception):
    """Base class for every error raised by hermap."""


class ArgumentError(HermapError, ValueError):
    """Malformed input: wrong shape, index out of range, bad partition."""


class DocumentError(ArgumentError):
    """A map document failed to parse or to validate against its schema."""

    def __init__(self, message: str, path: str = "$") -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


class DomainError(HermapError):
    """Well-formed input outside the domain of an operation (e.g. non-Hermitian map)."""


class NumericError(HermapError):
    """The eigensolver failed or its result misses the reconstruction tolerance."""
