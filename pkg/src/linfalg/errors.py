"""Exception hierarchy shared by every module."""


class LinfError(Exception):
    """Base class for library errors."""


class ArgumentError(LinfError, ValueError):
    """Inputs have the wrong shape, degree or base."""


class StructureError(LinfError):
    """An algebraic identity failed; ``witness`` names where."""

    def __init__(self, identity: str, witness=None):
        self.identity = identity
        self.witness = witness
        msg = identity if witness is None else f"{identity}: {witness}"
        super().__init__(msg)


class PreconditionError(LinfError):
    """An operation's precondition does not hold."""


class WindowError(LinfError):
    """A truncation window is too small for the requested computation."""


class UnsupportedError(LinfError):
    """The input is outside the finitely presented class handled here."""


class FixtureNotFound(LinfError, KeyError):
    pass


class ParseError(LinfError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = "" if line is None else f"line {line}, column {column or 1}: "
        super().__init__(where + message)
