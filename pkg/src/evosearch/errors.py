"""Exception hierarchy shared across the package."""

from __future__ import annotations


class EvoSearchError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(EvoSearchError):
    """Bad configuration: invalid settings, missing executables, unusable seeds.

    Maps to CLI exit code 2.
    """


class InvalidMetricsError(EvoSearchError):
    """Metrics outside their legal domain (non-positive sizes, errors outside [0, 1])."""


class MissingMetricsError(EvoSearchError):
    """An operation required candidate metrics that are absent."""


class LedgerError(EvoSearchError):
    """Structurally invalid or unreadable run ledger."""


class BackendError(EvoSearchError):
    """Base class for generation-backend failures."""


class BackendUnavailableError(BackendError):
    """Transport-level failure that persisted through retries."""


class BackendProtocolError(BackendError):
    """The backend answered, but not in the agreed shape. Not retryable."""


class RunAbortedError(EvoSearchError):
    """The run cannot continue (seed failure, storage failure).

    Maps to CLI exit code 3.
    """
