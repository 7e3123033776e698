"""Exception types shared across the package."""

from __future__ import annotations


class PathProphetError(Exception):
    """Base class for all package-specific errors."""


class InvalidInstanceError(PathProphetError):
    """The instance violates a structural requirement."""


class EnumerationCapError(PathProphetError):
    """Exact enumeration would exceed the configured cap.

    Callers should fall back to Monte Carlo estimation.
    """


class StateCapError(PathProphetError):
    """A dynamic program's state space exceeds the configured cap."""


class ScheduleError(PathProphetError):
    """Acceptance-schedule construction failed a consistency check."""


class CoverError(PathProphetError):
    """A path cover or strand decomposition is malformed for the instance."""


class PolicyError(PathProphetError):
    """A policy cannot be run on the given instance."""
