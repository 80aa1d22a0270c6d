"""Exception types shared across the package.

Two families: configuration problems (rejected input, reported exhaustively)
and numerical failures (a run that started but cannot produce a trustworthy
result). The CLI maps them to distinct exit codes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class IssueKind(str, Enum):
    """Classification of a single config validation failure."""

    MISSING_FIELD = "MissingField"
    NON_POSITIVE_FREQUENCY = "NonPositiveFrequency"
    NON_POSITIVE_MASS = "NonPositiveMass"
    UNKNOWN_MASS_CONVENTION = "UnknownMassConvention"
    INVALID_VALUE = "InvalidValue"


@dataclass(frozen=True)
class ConfigIssue:
    """One validation failure, naming the offending key."""

    kind: IssueKind
    key: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind.value}: {self.key}: {self.message}"


class ConfigValidationError(ValueError):
    """Raised by config validation; carries every issue found in one pass."""

    def __init__(self, issues: list[ConfigIssue]):
        self.issues = list(issues)
        super().__init__(
            "config validation failed:\n"
            + "\n".join(f"  - {issue}" for issue in self.issues)
        )

    def keys(self) -> list[str]:
        return [issue.key for issue in self.issues]


class NumericalError(RuntimeError):
    """A computation started but cannot be trusted to finish correctly."""


class UnderResolved(NumericalError):
    """Sampling step too coarse for the requested drive frequency."""


class LengthMismatch(NumericalError):
    """Signal realizations of unequal length fed to a reduction."""


class SpectralValueUnavailable(NumericalError):
    """Spectral density has no grid support and no line at the requested frequency."""


class ProbeOutsideCloud(NumericalError):
    """Density probe placed where the unperturbed cloud has zero density."""


class GridTooCoarse(NumericalError):
    """Spatial grid does not resolve the healing length."""


class NoConvergence(NumericalError):
    """Iteration exhausted its step budget before meeting tolerance."""

    def __init__(self, steps: int, message: str = ""):
        self.steps = steps
        super().__init__(message or f"no convergence after {steps} steps")


class NormDrift(NumericalError):
    """Wavefunction norm drifted beyond tolerance during evolution."""


class DomainEscape(NumericalError):
    """Density reached the edge of the periodic domain."""


class UnknownParameterPath(ValueError):
    """Sweep parameter path does not exist in the config document."""
