"""Two-photon spectral states: modeling, shearing interferometry, recovery.

The package splits into four layers:

* :mod:`biphoton.model` builds joint spectral amplitudes on frequency
  grids, decomposes them into Schmidt modes, and maps them to
  time-frequency views.
* :mod:`biphoton.interferometer` predicts spectral-shearing interference
  patterns and Monte-Carlo samples timestamped coincidence events through
  a detector model with drift.
* :mod:`biphoton.reconstruct` recovers the complex amplitude, the
  nonlocal quadratic phase, and the mode structure from event streams.
* :mod:`biphoton.io` handles run configuration files, binary event logs,
  text reports, and the ``biphoton`` command line.
"""
from . import errors, interferometer, io, model, reconstruct, units
from .errors import BiphotonError
from .interferometer import (
    DetectorModel,
    DriftModel,
    EventStream,
    Interferogram,
    ShearSettings,
    detected_pattern,
    expected_pattern,
    histogram,
    simulate_events,
)
from .model import (
    BiphotonState,
    FrequencyGrid,
    SchmidtSpectrum,
    SourceConfig,
    TimeFrequencyView,
    build_state,
    effective_schmidt_rank,
    modulus_only,
    schmidt_decompose,
    to_time_frequency,
)
from .reconstruct import (
    AnalysisSummary,
    ConfigurationResult,
    FitReport,
    MergeResult,
    PhaseSurface,
    ReconstructionResult,
    SidebandExtraction,
    analyze,
    concatenate_phase,
    dense_configuration,
    extract_sideband,
    fit_coefficients,
    gate_subsets,
    merge_configurations,
    phase_differential,
    reconstruct_configuration,
    summarize_reconstruction,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "interferometer",
    "io",
    "model",
    "reconstruct",
    "units",
    "BiphotonError",
    "DetectorModel",
    "DriftModel",
    "EventStream",
    "Interferogram",
    "ShearSettings",
    "detected_pattern",
    "expected_pattern",
    "histogram",
    "simulate_events",
    "BiphotonState",
    "FrequencyGrid",
    "SchmidtSpectrum",
    "SourceConfig",
    "TimeFrequencyView",
    "build_state",
    "effective_schmidt_rank",
    "modulus_only",
    "schmidt_decompose",
    "to_time_frequency",
    "AnalysisSummary",
    "ConfigurationResult",
    "FitReport",
    "MergeResult",
    "PhaseSurface",
    "ReconstructionResult",
    "SidebandExtraction",
    "analyze",
    "concatenate_phase",
    "dense_configuration",
    "extract_sideband",
    "fit_coefficients",
    "gate_subsets",
    "merge_configurations",
    "phase_differential",
    "reconstruct_configuration",
    "summarize_reconstruction",
    "__version__",
]
