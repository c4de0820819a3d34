"""Exception types raised by the toolkit.

Every exception carries a stable ``code`` string so CLI output and tests can
match on it without parsing messages.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all cldkit errors."""

    code = "ERROR"


class DuplicateInSequenceError(ToolkitError):
    code = "DUPLICATE_IN_SEQUENCE"


class EdgeMissingError(ToolkitError):
    code = "EDGE_MISSING"


class CycleLimitError(ToolkitError):
    """Enumeration exceeded the configured cycle cap; never truncates silently."""

    code = "CYCLE_LIMIT"

    def __init__(self, cap: int):
        super().__init__(f"cycle enumeration exceeded the cap of {cap}")
        self.cap = cap


class UnverifiedLoopError(ToolkitError):
    code = "UNVERIFIED_LOOP"


class InconsistentSolutionError(ToolkitError):
    code = "INCONSISTENT_SOLUTION"


class UnknownPolarityError(ToolkitError):
    code = "UNKNOWN_POLARITY"


class UnknownReferenceError(ToolkitError):
    code = "UNKNOWN_REFERENCE"


class NumericBlowupError(ToolkitError):
    """A simulated level became NaN or infinite."""

    code = "NUMERIC_BLOWUP"

    def __init__(self, time: float, variable_id: int):
        super().__init__(
            f"non-finite level for variable {variable_id} at t={time:g}"
        )
        self.time = time
        self.variable_id = variable_id


class CorpusCorruptError(ToolkitError):
    code = "CORPUS_CORRUPT"

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason
