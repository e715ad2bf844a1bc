from __future__ import annotations

from dataclasses import dataclass


class ParseError(ValueError):
    """Malformed input text. Carries the 1-based position and what was expected."""

    def __init__(self, message: str, line: int, col: int, expected: str = ""):
        self.line = line
        self.col = col
        self.expected = expected
        where = f"line {line}, column {col}"
        extra = f" (expected {expected})" if expected else ""
        super().__init__(f"{where}: {message}{extra}")


@dataclass(frozen=True)
class Violation:
    """One failed condition, named by `rule`, with a human readable detail."""

    rule: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.rule}: {self.detail}" if self.detail else self.rule
