"""Source positions and the error hierarchy shared by all front-end stages."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Pos:
    """Line/column position (1-based) inside a named source."""

    line: int
    col: int
    source: str = "<input>"

    def __str__(self):
        return f"{self.source}:{self.line}:{self.col}"


class PawError(Exception):
    """Base class for all workbench errors."""

    def __init__(self, message: str, pos: Pos | None = None):
        self.message = message
        self.pos = pos
        super().__init__(str(self))

    def __str__(self):
        if self.pos is not None:
            return f"{self.pos}: {self.message}"
        return self.message


class ParseError(PawError):
    """Lexical or syntactic error; always carries a position."""


class FlattenError(PawError):
    """Import resolution, binding, or declaration error."""


class UnknownNameError(FlattenError):
    """A name resolved to neither an atom nor a process."""

    def __init__(self, name: str, message: str, pos: Pos | None = None):
        self.name = name
        super().__init__(message, pos)


class LevelError(PawError):
    """A component uses primitives foreign to its level, or a level file is invalid."""


class MappingError(PawError):
    """Ill-formed refinement mapping (overlap, empty sequence, ambiguity)."""


class BudgetExceeded(PawError):
    """A state/rewrite/unfold budget ran out before the operation finished."""


class SimError(PawError):
    """Invalid simulator command (bad index, stepping a dead state)."""
