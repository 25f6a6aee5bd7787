"""Exception types shared across the package."""

from __future__ import annotations


class VirtrepError(Exception):
    """Base class for all package errors."""


class ParseError(VirtrepError):
    """Syntax error in a Turtle, N3 or SPARQL document.

    Carries 1-based line/column of the offending token.
    """

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{message} (line {line}, column {col})" if line else message)
        self.message = message
        self.line = line
        self.col = col


class SafetyError(VirtrepError):
    """A rule failed the safety/orderability validation."""

    def __init__(self, rule_index: int, variable: str, reason: str):
        super().__init__(f"rule {rule_index}: {reason} (variable ?{variable})")
        self.rule_index = rule_index
        self.variable = variable
        self.reason = reason


class TypeMismatchError(VirtrepError):
    """A builtin received a non-numeric input."""


class NonTerminationError(VirtrepError):
    """Forward chaining did not reach a fixpoint within the round limit."""

    def __init__(self, limit: int):
        super().__init__(f"no fixpoint after {limit} rounds")
        self.limit = limit


class CollectionFailed(VirtrepError):
    """Upstream data collection failed under the Abort policy.

    ``report`` is the full FetchReport; the merged graph is discarded.
    """

    def __init__(self, report):
        failed = [e for e in report.entries if e.outcome != "OK"]
        super().__init__(
            "collection failed: "
            + "; ".join(f"{e.target} -> {e.outcome}" for e in failed)
        )
        self.report = report


class ConfigurationIncomplete(VirtrepError):
    """A VR container is missing configuration children."""

    def __init__(self, missing: list[str]):
        super().__init__("missing configuration: " + ", ".join(missing))
        self.missing = missing


class AmbiguousConfiguration(VirtrepError):
    """Two children of a VR container share one configuration role."""

    def __init__(self, role: str):
        super().__init__(f"more than one {role} resource in container")
        self.role = role


class IsomorphismUndecided(VirtrepError):
    """Isomorphism search was aborted because the blank-node bound was hit."""
