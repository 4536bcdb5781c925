"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class HetpartError(Exception):
    exit_code = 4


class ParseError(HetpartError, ValueError):
    exit_code = 2

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class ValidationError(HetpartError, ValueError):
    exit_code = 2


class IntegrityError(ValidationError):
    """An assignment does not cover the graph's edges exactly once."""


class InfeasibleError(HetpartError):
    exit_code = 3


class CapacityError(HetpartError):
    """Graph too large for the index types in use."""
    exit_code = 3


class BudgetError(HetpartError, ValueError):
    """Exhaustive oracle refused: instance exceeds the enumeration budget."""
    exit_code = 2


class InvariantError(HetpartError, AssertionError):
    exit_code = 4
