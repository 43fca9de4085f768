"""Run configuration files: structured text, defaults, load-time checks.

A run file is YAML with up to seven sections, all optional (a missing
section or key takes its default). Leaf keys carry unit suffixes. The
full schema, with defaults:

``source``
    ``center_wavelength1_nm`` (830.0), ``center_wavelength2_nm`` (830.0),
    ``fwhm_bandwidth1_nm`` (2.5), ``fwhm_bandwidth2_nm`` (7.5),
    ``pump_chirp_fs2`` (0.0), ``local_chirp1_fs2`` (0.0),
    ``local_chirp2_fs2`` (0.0), ``intrinsic_crystal_phase_fs2`` (0.0).
``grids``
    ``signal`` and ``idler`` subsections, each with ``count`` (1024 for
    the signal, 2048 for the idler) and exactly one of ``step_nm``
    (default 0.025, converted at that photon's center wavelength) or
    ``step_rad_per_fs``.
``interferometer``
    ``delay_fs`` (5000.0) and exactly one of ``shear_steps`` (default 4,
    in signal-grid bins) or ``shear_rad_per_fs``.
``detector``
    ``resolution_sheared_nm`` (0.05), ``resolution_herald_nm`` (0.3),
    ``efficiency`` (0.10), ``coincidence_rate_hz`` (15.0),
    ``spectral_range_nm`` ([825.0, 835.0]).
``drift``
    ``kind`` ("random-walk" or "none"), ``diffusion_rad2_per_s``
    (1.1e-3), ``seed`` (null: derived from the acquisition seed).
``acquisition``
    ``duration_s`` (7200.0), ``subset_size`` (5000),
    ``contrast_threshold`` (0.20), ``seed`` (0).
``outputs``
    ``directory`` ("out").

All cross-field validation happens at load time: the source must fit the
grids (edge decay, phase sampling), the shear must align with both grids
and the delay clear the sheared photon's transform-limited width, and the
detector window must overlap both grids. Every violation raises
:class:`~biphoton.errors.ConfigError` naming the offending key.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np
import yaml

from ..errors import BiphotonError, ConfigError
from ..interferometer import (
    DetectorModel,
    DriftModel,
    ShearSettings,
    validate_shear,
)
from ..model import BiphotonState, FrequencyGrid, SourceConfig, build_state
from ..units import bandwidth_to_angular, omega_from_wavelength

__all__ = [
    "AcquisitionSettings",
    "OutputSettings",
    "RunConfig",
    "load_config",
    "parse_config",
    "config_digest",
]


@dataclass(frozen=True)
class AcquisitionSettings:
    """How long to acquire and how to cut the stream into subsets."""

    duration: float = 7200.0
    subset_size: int = 5000
    contrast_threshold: float = 0.20
    seed: int = 0

    def __post_init__(self) -> None:
        if self.duration <= 0.0:
            raise ConfigError(f"acquisition.duration_s must be positive, got {self.duration}")
        if self.subset_size < 100:
            raise ConfigError(
                f"acquisition.subset_size must be at least 100, got {self.subset_size}"
            )
        if not 0.0 < self.contrast_threshold < 1.0:
            raise ConfigError(
                "acquisition.contrast_threshold must be in (0, 1), got "
                f"{self.contrast_threshold}"
            )
        if self.seed < 0:
            raise ConfigError(f"acquisition.seed must be non-negative, got {self.seed}")


@dataclass(frozen=True)
class OutputSettings:
    directory: str = "out"


@dataclass(frozen=True, eq=False)
class RunConfig:
    """A fully validated run: source, grids, both shear configurations."""

    source: SourceConfig
    grid1: FrequencyGrid
    grid2: FrequencyGrid
    shear_signal: ShearSettings
    shear_idler: ShearSettings
    detector: DetectorModel
    drift: DriftModel
    acquisition: AcquisitionSettings = field(default_factory=AcquisitionSettings)
    outputs: OutputSettings = field(default_factory=OutputSettings)

    def build(self) -> BiphotonState:
        """The source state on this run's model grids."""
        return build_state(self.source, self.grid1, self.grid2)


def _as_float(section: str, key: str, value) -> float:
    if isinstance(value, str):
        # YAML 1.1 reads exponents without a sign ("1.6e5") as strings
        try:
            return float(value)
        except ValueError:
            pass
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key}: expected a number, got {value!r}")
    return float(value)


def _as_int(section: str, key: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{section}.{key}: expected an integer, got {value!r}")
    return int(value)


class _Section:
    """One mapping section with unknown-key detection."""

    def __init__(self, name: str, data) -> None:
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"section '{name}' must be a mapping, got {type(data).__name__}")
        self.name = name
        self.data = dict(data)

    def take(self, key: str, default):
        return self.data.pop(key, default)

    def take_float(self, key: str, default: float) -> float:
        value = self.data.pop(key, None)
        return default if value is None else _as_float(self.name, key, value)

    def take_int(self, key: str, default: int) -> int:
        value = self.data.pop(key, None)
        return default if value is None else _as_int(self.name, key, value)

    def finish(self) -> None:
        if self.data:
            keys = ", ".join(sorted(map(str, self.data)))
            raise ConfigError(f"unknown key(s) in section '{self.name}': {keys}")


def _parse_grid(name: str, data, default_count: int, center_nm: float) -> FrequencyGrid:
    sec = _Section(name, data)
    count = sec.take_int("count", default_count)
    step_nm = sec.take("step_nm", None)
    step_w = sec.take("step_rad_per_fs", None)
    sec.finish()
    if step_nm is not None and step_w is not None:
        raise ConfigError(f"{name}: give step_nm or step_rad_per_fs, not both")
    if step_w is not None:
        step = _as_float(name, "step_rad_per_fs", step_w)
    else:
        step = bandwidth_to_angular(
            _as_float(name, "step_nm", 0.025 if step_nm is None else step_nm), center_nm
        )
    try:
        return FrequencyGrid(center=omega_from_wavelength(center_nm), step=step, count=count)
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a run configuration document."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"configuration is not valid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"configuration root must be a mapping, got {type(raw).__name__}")
    raw = dict(raw)
    known = {
        "source", "grids", "interferometer", "detector", "drift",
        "acquisition", "outputs",
    }
    unknown = sorted(set(map(str, raw)) - known)
    if unknown:
        raise ConfigError(f"unknown top-level section(s): {', '.join(unknown)}")

    src = _Section("source", raw.get("source"))
    try:
        source = SourceConfig(
            center_wavelength1=src.take_float("center_wavelength1_nm", 830.0),
            center_wavelength2=src.take_float("center_wavelength2_nm", 830.0),
            fwhm_bandwidth1=src.take_float("fwhm_bandwidth1_nm", 2.5),
            fwhm_bandwidth2=src.take_float("fwhm_bandwidth2_nm", 7.5),
            pump_chirp=src.take_float("pump_chirp_fs2", 0.0),
            local_chirp1=src.take_float("local_chirp1_fs2", 0.0),
            local_chirp2=src.take_float("local_chirp2_fs2", 0.0),
            intrinsic_crystal_phase=src.take_float("intrinsic_crystal_phase_fs2", 0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"source: {exc}") from exc
    src.finish()

    grids = _Section("grids", raw.get("grids"))
    grid1 = _parse_grid("grids.signal", grids.take("signal", None), 1024,
                        source.center_wavelength1)
    grid2 = _parse_grid("grids.idler", grids.take("idler", None), 2048,
                        source.center_wavelength2)
    grids.finish()

    ifo = _Section("interferometer", raw.get("interferometer"))
    delay = ifo.take_float("delay_fs", 5000.0)
    shear_steps = ifo.take("shear_steps", None)
    shear_w = ifo.take("shear_rad_per_fs", None)
    ifo.finish()
    if shear_steps is not None and shear_w is not None:
        raise ConfigError("interferometer: give shear_steps or shear_rad_per_fs, not both")
    if shear_w is not None:
        shear = _as_float("interferometer", "shear_rad_per_fs", shear_w)
    else:
        steps = 4 if shear_steps is None else _as_int("interferometer", "shear_steps", shear_steps)
        shear = steps * grid1.step
    try:
        shear_signal = ShearSettings(shear=shear, delay=delay, sheared_photon="signal")
        shear_idler = ShearSettings(shear=shear, delay=delay, sheared_photon="idler")
    except ValueError as exc:
        raise ConfigError(f"interferometer: {exc}") from exc

    det_sec = _Section("detector", raw.get("detector"))
    rng_nm = det_sec.take("spectral_range_nm", [825.0, 835.0])
    if (not isinstance(rng_nm, (list, tuple)) or len(rng_nm) != 2):
        raise ConfigError(
            f"detector.spectral_range_nm must be a pair [low, high], got {rng_nm!r}"
        )
    lo = _as_float("detector", "spectral_range_nm[0]", rng_nm[0])
    hi = _as_float("detector", "spectral_range_nm[1]", rng_nm[1])
    try:
        detector = DetectorModel(
            resolution_sheared=det_sec.take_float("resolution_sheared_nm", 0.05),
            resolution_herald=det_sec.take_float("resolution_herald_nm", 0.3),
            efficiency=det_sec.take_float("efficiency", 0.10),
            coincidence_rate=det_sec.take_float("coincidence_rate_hz", 15.0),
            spectral_range=(lo, hi),
        )
    except ValueError as exc:
        raise ConfigError(f"detector: {exc}") from exc
    det_sec.finish()

    drift_sec = _Section("drift", raw.get("drift"))
    kind = drift_sec.take("kind", "random-walk")
    diffusion = drift_sec.take_float("diffusion_rad2_per_s", 1.1e-3)
    drift_seed = drift_sec.take("seed", None)
    drift_sec.finish()
    if drift_seed is not None:
        drift_seed = _as_int("drift", "seed", drift_seed)
    try:
        drift = DriftModel(kind=kind, diffusion=diffusion, seed=drift_seed)
    except ValueError as exc:
        raise ConfigError(f"drift: {exc}") from exc

    acq_sec = _Section("acquisition", raw.get("acquisition"))
    acquisition = AcquisitionSettings(
        duration=acq_sec.take_float("duration_s", 7200.0),
        subset_size=acq_sec.take_int("subset_size", 5000),
        contrast_threshold=acq_sec.take_float("contrast_threshold", 0.20),
        seed=acq_sec.take_int("seed", 0),
    )
    acq_sec.finish()

    out_sec = _Section("outputs", raw.get("outputs"))
    directory = out_sec.take("directory", "out")
    out_sec.finish()
    if not isinstance(directory, str) or not directory:
        raise ConfigError(f"outputs.directory must be a non-empty string, got {directory!r}")

    cfg = RunConfig(
        source=source, grid1=grid1, grid2=grid2,
        shear_signal=shear_signal, shear_idler=shear_idler,
        detector=detector, drift=drift,
        acquisition=acquisition, outputs=OutputSettings(directory=directory),
    )
    _cross_validate(cfg)
    return cfg


def _cross_validate(cfg: RunConfig) -> None:
    try:
        state = cfg.build()
    except BiphotonError as exc:
        raise ConfigError(f"source does not fit the grids: {exc}") from exc
    for settings in (cfg.shear_signal, cfg.shear_idler):
        try:
            validate_shear(settings, state)
        except BiphotonError as exc:
            raise ConfigError(
                f"interferometer settings invalid for the {settings.sheared_photon}"
                f"-sheared configuration: {exc}"
            ) from exc
    lo_nm, hi_nm = cfg.detector.spectral_range
    w_lo, w_hi = omega_from_wavelength(hi_nm), omega_from_wavelength(lo_nm)
    for label, grid in (("signal", cfg.grid1), ("idler", cfg.grid2)):
        absolute = grid.absolute()
        if not ((absolute >= w_lo) & (absolute <= w_hi)).any():
            raise ConfigError(
                f"detector.spectral_range_nm [{lo_nm}, {hi_nm}] does not overlap "
                f"the {label} grid"
            )


def load_config(path) -> RunConfig:
    """Load and validate a run configuration file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        return parse_config(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def config_digest(cfg: RunConfig) -> str:
    """Short stable digest of a run configuration, for log headers."""
    payload = {
        "source": asdict(cfg.source),
        "grid1": asdict(cfg.grid1),
        "grid2": asdict(cfg.grid2),
        "shear_signal": asdict(cfg.shear_signal),
        "shear_idler": asdict(cfg.shear_idler),
        "detector": asdict(cfg.detector),
        "drift": asdict(cfg.drift),
        "acquisition": asdict(cfg.acquisition),
    }
    blob = json.dumps(payload, sort_keys=True, default=repr).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
