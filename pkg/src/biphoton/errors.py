"""Exception types shared across the package.

Every validation failure raises a subclass of :class:`BiphotonError` whose
message names the violated rule, so callers (and the command line driver)
can report the precise reason a run refused to start or aborted.
"""
from __future__ import annotations

__all__ = [
    "BiphotonError",
    "GridTooNarrowError",
    "PhaseAliasingError",
    "ShearAlignmentError",
    "DelayTooSmallError",
    "EmptyAcceptanceWindowError",
    "DegenerateHistogramError",
    "SidebandMisalignedError",
    "NoSubsetsAcceptedError",
    "DecompositionFailedError",
    "EventLogFormatError",
    "StateFileError",
    "ConfigError",
]


class BiphotonError(Exception):
    """Base class for all package-specific failures."""


class GridTooNarrowError(BiphotonError, ValueError):
    """A frequency grid clips the spectral envelope above the decay floor."""


class PhaseAliasingError(BiphotonError, ValueError):
    """The sampled phase changes by more than pi between adjacent samples."""


class ShearAlignmentError(BiphotonError, ValueError):
    """The spectral shear is not an integer number of grid steps."""


class DelayTooSmallError(BiphotonError, ValueError):
    """The interferometer delay cannot separate sideband from baseband."""


class EmptyAcceptanceWindowError(BiphotonError, ValueError):
    """No grid cell falls inside the detector's spectral acceptance window."""


class DegenerateHistogramError(BiphotonError, ValueError):
    """An interferogram holds no counts (or an identically zero pattern)."""


class SidebandMisalignedError(BiphotonError, ValueError):
    """The Fourier sideband peak is not where the configured delay puts it.

    Raised during extraction when the pooled sideband maximum falls more
    than one Fourier-domain sample away from the configured delay; this is
    the signature of fringe washout or a wrong delay setting.
    """


class NoSubsetsAcceptedError(BiphotonError, ValueError):
    """Contrast gating rejected every acquisition subset."""


class DecompositionFailedError(BiphotonError, RuntimeError):
    """The singular value decomposition did not converge."""


class EventLogFormatError(BiphotonError, ValueError):
    """An event log file is unreadable: bad magic, version, or truncation."""


class StateFileError(BiphotonError, ValueError):
    """A saved state's files are missing geometry or inconsistent."""


class ConfigError(BiphotonError, ValueError):
    """A run configuration failed to parse or validate."""
