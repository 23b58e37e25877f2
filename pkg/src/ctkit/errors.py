"""Failure classes shared across modules and mapped to CLI exit codes."""


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed its configured size cap."""


class InternalContradiction(AssertionError):
    """A proved theorem failed on valid input. Never caught silently."""
