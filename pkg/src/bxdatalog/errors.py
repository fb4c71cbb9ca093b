"""Exception hierarchy shared by every subpackage."""

from __future__ import annotations


class BxError(Exception):
    """Base class for all errors raised by bxdatalog."""


class ParseError(BxError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class ProgramError(BxError):
    """A program is syntactically fine but ill-formed (arity clash, bad head...)."""


class UnsafeRuleError(ProgramError):
    def __init__(self, rule: object, variable: str) -> None:
        super().__init__(f"unsafe variable {variable} in rule: {rule}")
        self.rule = rule
        self.variable = variable


class StratificationError(ProgramError):
    def __init__(self, cycle: list[str]) -> None:
        super().__init__("program is not stratifiable; negative cycle: " + " -> ".join(cycle))
        self.cycle = cycle


class EvaluationError(BxError):
    pass


class SchemaMismatchError(BxError):
    pass


class DeltaError(BxError):
    """A delta is inconsistent or does not apply cleanly to a database."""

    def __init__(self, message: str, relation: str | None = None, row: tuple | None = None) -> None:
        super().__init__(message)
        self.relation = relation
        self.row = row


class StrategyError(BxError):
    """A putback strategy violates its structural invariants."""


class DerivationError(BxError):
    """The view definition could not be derived from a strategy."""

    def __init__(self, message: str, counterexample: object | None = None) -> None:
        super().__init__(message)
        self.counterexample = counterexample


class NetworkError(BxError):
    """Invalid Dejima topology or link."""


class SqlGenError(BxError):
    pass
