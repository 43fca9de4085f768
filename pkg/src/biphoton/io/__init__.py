"""Configuration files, event logs, reports, and the command line."""
from .config import (
    AcquisitionSettings,
    OutputSettings,
    RunConfig,
    config_digest,
    load_config,
    parse_config,
)
from .cli import main
from .eventlog import FORMAT_VERSION, read_event_header, read_events, write_events
from .pipeline import EVENT_FILES, apply_overrides, run_reconstruct, run_simulate
from .report import (
    emit_analysis_report,
    emit_reconstruction_report,
    load_state,
    pooled_counts,
    write_fit_summary,
    write_interferogram,
    write_matrix,
    write_schmidt_values,
    write_state,
    write_triples,
)

__all__ = [
    "AcquisitionSettings",
    "OutputSettings",
    "RunConfig",
    "config_digest",
    "load_config",
    "parse_config",
    "main",
    "FORMAT_VERSION",
    "read_event_header",
    "read_events",
    "write_events",
    "EVENT_FILES",
    "apply_overrides",
    "run_reconstruct",
    "run_simulate",
    "emit_analysis_report",
    "emit_reconstruction_report",
    "load_state",
    "pooled_counts",
    "write_fit_summary",
    "write_interferogram",
    "write_matrix",
    "write_schmidt_values",
    "write_state",
    "write_triples",
]
