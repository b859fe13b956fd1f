"""Exception types shared across the package."""

from __future__ import annotations


class BPTrafficError(Exception):
    """Base class for all package errors."""


class ContractViolation(BPTrafficError, ValueError):
    """An operation was called outside its documented preconditions."""


class ScenarioError(BPTrafficError, ValueError):
    """A scenario document failed parsing or validation.

    Carries the full diagnostic list so callers can report every problem
    at once instead of failing on the first.
    """

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = [f"{d.severity}[{d.code}] {d.path}: {d.message}" for d in self.diagnostics]
        super().__init__("scenario invalid:\n" + "\n".join(lines))


class SolverError(BPTrafficError, RuntimeError):
    """The LP backend failed; never silently converted into a verdict."""


class SimulationError(BPTrafficError, RuntimeError):
    """An internal simulator invariant was breached (e.g. negative queue)."""
