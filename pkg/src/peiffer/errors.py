"""Exception types shared across the toolkit."""

from __future__ import annotations


class PeifferError(Exception):
    """Base class for all toolkit errors."""


class EmptyWord(PeifferError):
    """An operation that needs a nonempty word received the empty word."""


class PresentationSyntaxError(PeifferError):
    """Malformed presentation or sequence text, with source location."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ValidationError(PeifferError):
    """A structural invariant failed; carries the individual violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class PreconditionViolated(PeifferError):
    """A named precondition of an operation does not hold."""


class NotIdentitySequence(PeifferError):
    """The sequence's product is not freely trivial."""


class StrategyInapplicable(PeifferError):
    """The requested membership strategy cannot be used for this target."""


class BoundaryNotTrivial(PeifferError):
    """The boundary label is not freely trivial, so the disk cannot be capped."""


class BoundaryMismatch(PeifferError):
    """Two boundary words that must agree letter-for-letter do not."""


class PathNotSimple(PeifferError):
    """The requested closed path does not bound a coherent subpicture."""


class InadmissibleMove(PeifferError):
    """The move would violate an equator-picture condition."""


class NoSeparatingPath(PeifferError):
    """No simple closed path separates the two vertex classes of the picture."""
