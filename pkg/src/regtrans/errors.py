"""Exception hierarchy shared by the toolkit."""


class RegtransError(Exception):
    """Base class for all toolkit errors."""


class DefinitionError(RegtransError):
    """A machine or formula refers to something that does not exist."""


class PreconditionError(RegtransError):
    """An operation was called on an input that violates its precondition.

    ``witness`` optionally carries the object that shows the violation
    (for instance the verdict proving that a machine is not functional).
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ResourceError(RegtransError):
    """An exploration exceeded its configured state budget."""


class DomainError(RegtransError):
    """The evaluator read a prefix that has no accepting continuation."""


class ParseError(RegtransError):
    """Syntax or validation error in a textual input, with a position."""

    def __init__(self, message, line=None, column=None):
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.column = column
