"""Exception types shared across the compiler and runtime."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    end_line: int = 0
    end_col: int = 0

    def __str__(self):
        return f"{self.line}:{self.col}"


class AdevError(Exception):
    """Base class for every error raised by the package."""


class ParseError(AdevError):
    def __init__(self, message, line=0, col=0, expected=()):
        self.line = line
        self.col = col
        self.expected = tuple(sorted(set(expected)))
        where = f"{line}:{col}: " if line else ""
        extra = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{where}{message}{extra}")
        self.message = message


class TypeCheckError(AdevError):
    """A static type error.

    kind is one of: mismatch, unbound, smoothness-violation, non-prob-do,
    overload-failure, entry.
    """

    def __init__(self, kind, message, span=None, expected=None, found=None):
        self.kind = kind
        self.span = span
        self.expected = expected
        self.found = found
        self.message = message
        where = f"{span}: " if span else ""
        super().__init__(f"{where}{kind}: {message}")

    def to_json(self):
        from .printer import show_type

        return {
            "kind": self.kind,
            "span": None if self.span is None else [self.span.line, self.span.col],
            "expected": None if self.expected is None else show_type(self.expected),
            "found": None if self.found is None else show_type(self.found),
            "message": self.message,
        }


class TranslationError(AdevError):
    pass


class AdevRuntimeError(AdevError):
    pass


class NonFiniteError(AdevRuntimeError):
    pass


class WitnessUnavailable(AdevError):
    pass


class OracleError(AdevError):
    pass
