"""Exception types shared across the package."""


class CfgEnumError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(CfgEnumError):
    """A text file (grammar, PDAnn, extraction grammar) could not be parsed."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class SemanticError(CfgEnumError):
    """The input is well-formed but violates a semantic requirement."""


class UnitCycle(SemanticError):
    """The unit table D of a trimmed grammar contains a cycle."""

    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        super().__init__("unit/nullable cycle: " + " -> ".join(self.cycle))


class EmptyInput(SemanticError):
    """Preprocessing was called on the empty string."""


class SizeLimit(SemanticError):
    """A construction exceeded its configured size cap."""


class ScaleLimit(CfgEnumError):
    """A brute-force oracle was asked for more than it can enumerate."""


class NotProfiledDeterministic(SemanticError):
    """The PDAnn could not be certified profiled-deterministic."""


class NoRun(SemanticError):
    """The automaton has no accepting run on the input."""


class StepBudget(SemanticError):
    """A deterministic simulation exceeded its linear step budget."""


class InvalidRefWord(SemanticError):
    """A ref-word does not open and close every variable exactly once."""


class MalformedOutput(SemanticError):
    """An output cannot be decoded back into a mapping."""


class NotBinary(SemanticError):
    """Internal: a rule was not in the restricted binary form expected."""
