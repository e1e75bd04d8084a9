"""Exception hierarchy for suzuki-lab.

Every error raised on purpose by the library derives from ``LabError`` so the
CLI can map it to an exit code.  Outcomes that are legitimately undecided
(closure cap reached, witness search exhausted, solver not converged) are
status values on the result objects, not exceptions.
"""

from __future__ import annotations


class LabError(Exception):
    """Base class for all suzuki-lab errors."""


class FieldError(LabError, ValueError):
    """Invalid field parameters or an undefined field operation (e.g. 1/0)."""


class FieldMismatchError(LabError, ValueError):
    """Operands come from two different fields."""


class CapacityError(LabError):
    """A requested size exceeds a desk-scale limit.

    ``hint`` carries a remediation suggestion that the CLI prints verbatim.
    """

    def __init__(self, message: str, *, limit: int | float | None = None, hint: str = "") -> None:
        super().__init__(message)
        self.limit = limit
        self.hint = hint


class InternalConsistencyError(LabError):
    """A mathematical invariant failed; this always indicates a bug."""


class ConfigError(LabError, ValueError):
    """Experiment configuration is malformed or out of range."""


class SchemaError(LabError):
    """Reports with incompatible schema versions were combined."""


class CacheError(LabError):
    """A GroupIndex cache file is truncated, corrupt, or for another group."""


class ManifestError(LabError):
    """A manifest lists a file that is missing or whose content hash changed."""
