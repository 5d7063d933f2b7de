"""Exception types shared across the library.

ValidationError covers bad user input (files, configs, graph data) and maps
to CLI exit code 2. ComputationError covers failures inside an otherwise
valid computation and maps to exit code 3. ContractViolation signals API
misuse (precondition broken by the caller) and is a ValueError so that it
behaves normally under pytest.raises.
"""

from __future__ import annotations


class ValidationError(ValueError):
    """Input data violates a documented invariant."""


class IngestionError(ValidationError):
    """Malformed record in an edge-list stream; carries the line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ContractViolation(ValueError):
    """An operation precondition was broken by the caller."""


class ComputationError(RuntimeError):
    """A computation failed on structurally valid input."""
