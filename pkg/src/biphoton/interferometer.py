"""Forward model of the shearing interferometer measurement.

One photon of the pair traverses a two-arm interferometer whose arms apply
a spectral shear and a relative delay; the other photon is heralded on a
spectrometer. The detected coincidence pattern versus the two measured
frequencies is

    S(w1, w2) = (1/4)*(JSI(w1, w2) + JSI(w1 + shear, w2))
                + Re[B(w1, w2) * exp(i*theta)]

with the interference term

    B = (1/2) * f(w1, w2) * conj(f(w1 + shear, w2)) * exp(i*dw1*delay)

where ``theta`` is the slowly drifting global fringe phase and ``dw1`` the
detuning of the sheared photon (the carrier-frequency part of the fringe
term is a constant absorbed into ``theta``). Since
|B| <= (1/4)*(JSI + JSI_shifted) pointwise, the pattern is non-negative
and ``A + |B|`` is a valid rejection-sampling envelope even after the
linear detector blur.

Monte-Carlo event generation draws Poisson-distributed coincidence counts
with uniform arrival times, evolves the fringe phase as a Wiener process,
and samples each event from the pattern frozen at its arrival time, after
applying detector blur and the spectral acceptance window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import (
    DegenerateHistogramError,
    DelayTooSmallError,
    EmptyAcceptanceWindowError,
    ShearAlignmentError,
)
from .model import BiphotonState, FrequencyGrid
from .units import (
    FWHM_OVER_SIGMA,
    bandwidth_to_angular,
    fwhm_to_sigma,
    omega_from_wavelength,
    wavelength_from_omega,
)

__all__ = [
    "ShearSettings",
    "DetectorModel",
    "DriftModel",
    "EventStream",
    "Interferogram",
    "SIGNAL_IN_EOSI",
    "IDLER_IN_EOSI",
    "validate_shear",
    "shear_step_count",
    "expected_pattern",
    "detected_pattern",
    "detector_blur",
    "detector_grids",
    "simulate_events",
    "histogram",
]

SIGNAL_IN_EOSI = "signal-in-EOSI"
IDLER_IN_EOSI = "idler-in-EOSI"

# Relative tolerance for "shear is an integer number of grid steps".
SHEAR_ALIGNMENT_RTOL = 1e-9

# Blur kernels extend to 7 sigma so they carry unit mass to ~1e-12.
BLUR_TRUNCATE = 7.0

MIN_SUBSET_SIZE = 100


@dataclass(frozen=True)
class ShearSettings:
    """Interferometer arm parameters.

    Parameters
    ----------
    shear : float
        Spectral shear applied in one arm, rad/fs. Must be an integer
        multiple of the sheared photon's grid step (validated against a
        state by :func:`validate_shear`).
    delay : float
        Relative arm delay in fs. Nonzero, and large enough that the
        Fourier sideband at the delay separates from the baseband.
    sheared_photon : str
        ``"signal"`` or ``"idler"``: which photon enters the
        interferometer; the other is heralded spectrally.
    """

    shear: float
    delay: float
    sheared_photon: str = "signal"

    def __post_init__(self) -> None:
        if self.sheared_photon not in ("signal", "idler"):
            raise ValueError(
                f"sheared_photon must be 'signal' or 'idler', "
                f"got {self.sheared_photon!r}"
            )

    @property
    def configuration(self) -> str:
        return SIGNAL_IN_EOSI if self.sheared_photon == "signal" else IDLER_IN_EOSI


@dataclass(frozen=True)
class DetectorModel:
    """Spectrometer and counting characteristics.

    Resolutions are intensity-FWHM spectral blurs in nm; ``spectral_range``
    is the (min, max) wavelength acceptance window in nm, applied to both
    arms. ``coincidence_rate`` is the realized (post-efficiency) detected
    pair rate in events/s; ``efficiency`` is carried for reporting and does
    not rescale the rate.
    """

    resolution_sheared: float = 0.05
    resolution_herald: float = 0.3
    efficiency: float = 0.10
    coincidence_rate: float = 15.0
    spectral_range: tuple[float, float] = (825.0, 835.0)

    def __post_init__(self) -> None:
        if not self.resolution_sheared > 0.0 or not self.resolution_herald > 0.0:
            raise ValueError("detector resolutions must be positive")
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError(f"efficiency must be in (0, 1], got {self.efficiency}")
        if not self.coincidence_rate > 0.0:
            raise ValueError("coincidence_rate must be positive")
        lo, hi = self.spectral_range
        if not 0.0 < lo < hi:
            raise ValueError(f"spectral_range must satisfy 0 < min < max, got {self.spectral_range}")


@dataclass(frozen=True)
class DriftModel:
    """Global fringe-phase drift.

    ``random-walk`` evolves the fringe phase theta(t) as a Wiener process
    with the given diffusion (rad^2/s) and theta(0) = 0; ``none`` keeps it
    at zero. The default diffusion 1.1e-3 rad^2/s accumulates ~2 rad RMS
    over an hour. ``seed`` fixes the drift realization independently of
    the event-sampling seed; None derives it from the simulation seed.
    """

    kind: str = "random-walk"
    diffusion: float = 1.1e-3
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("none", "random-walk"):
            raise ValueError(f"drift kind must be 'none' or 'random-walk', got {self.kind!r}")
        if self.diffusion < 0.0:
            raise ValueError("drift diffusion must be non-negative")


@dataclass(frozen=True, eq=False)
class EventStream:
    """Timestamped coincidence events in detector-bin coordinates.

    ``bin1`` indexes ``sheared_grid`` (the interferometer-arm spectrometer),
    ``bin2`` indexes ``herald_grid``; ``timestamps`` are seconds since the
    acquisition started, strictly increasing.
    """

    configuration: str
    settings: ShearSettings
    sheared_grid: FrequencyGrid
    herald_grid: FrequencyGrid
    bin1: np.ndarray = field(repr=False)
    bin2: np.ndarray = field(repr=False)
    timestamps: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        n = len(self.timestamps)
        if len(self.bin1) != n or len(self.bin2) != n:
            raise ValueError("bin and timestamp arrays must have equal length")
        if n:
            if self.bin1.max(initial=0) >= self.sheared_grid.count or self.bin2.max(
                initial=0
            ) >= self.herald_grid.count:
                raise ValueError("bin index outside its grid")
            if np.any(np.diff(self.timestamps) <= 0.0):
                raise ValueError("timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.timestamps)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventStream):
            return NotImplemented
        return (
            self.configuration == other.configuration
            and self.settings == other.settings
            and self.sheared_grid == other.sheared_grid
            and self.herald_grid == other.herald_grid
            and np.array_equal(self.bin1, other.bin1)
            and np.array_equal(self.bin2, other.bin2)
            and np.array_equal(self.timestamps, other.timestamps)
        )


@dataclass(frozen=True, eq=False)
class Interferogram:
    """Binned counts of one acquisition subset.

    ``counts[i, j]`` is the number of events in sheared-photon bin i and
    herald bin j; ``bin_grids`` are (sheared, herald) detector grids.
    """

    counts: np.ndarray = field(repr=False)
    settings: ShearSettings
    bin_grids: tuple[FrequencyGrid, FrequencyGrid]
    total_events: int

    def __post_init__(self) -> None:
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")
        if int(self.counts.sum()) != self.total_events:
            raise ValueError("total_events must equal the sum of counts")


def shear_step_count(settings: ShearSettings, grid: FrequencyGrid) -> int:
    """The shear expressed in grid steps; errors unless it is an integer.

    Raises
    ------
    ShearAlignmentError
        If ``settings.shear`` deviates from an integer multiple of
        ``grid.step`` by more than one part in 1e9.
    """
    ratio = settings.shear / grid.step
    m = round(ratio)
    if abs(ratio - m) > SHEAR_ALIGNMENT_RTOL * max(1.0, abs(ratio)):
        raise ShearAlignmentError(
            f"shear {settings.shear!r} rad/fs is {ratio:.9f} grid steps; "
            "it must be an exact integer multiple of the sheared axis step"
        )
    return int(m)


def _measurement_state(state: BiphotonState, settings: ShearSettings) -> BiphotonState:
    """State with axis 0 = sheared photon, axis 1 = heralded photon."""
    return state if settings.sheared_photon == "signal" else state.swapped()


def _transform_limited_fwhm(state: BiphotonState, axis: int) -> float:
    """Temporal intensity FWHM of one photon's transform-limited marginal.

    Gaussian-equivalent estimate from the marginal's spectral intensity
    standard deviation: a spectral width sigma transforms to a temporal
    width 1/(2*sigma).
    """
    grid = state.grid1 if axis == 0 else state.grid2
    marg = state.marginal(axis)
    d = grid.detunings()
    total = float(marg.sum())
    mean = float((marg * d).sum()) / total
    var = float((marg * (d - mean) ** 2).sum()) / total
    sigma_w = math.sqrt(var)
    return FWHM_OVER_SIGMA / (2.0 * sigma_w)


def validate_shear(settings: ShearSettings, state: BiphotonState) -> int:
    """Check shear alignment and sideband separation for ``state``.

    Returns the shear in grid steps. The delay must be nonzero and exceed
    four transform-limited temporal FWHMs of the sheared photon's
    marginal, otherwise the Fourier sideband cannot be isolated from the
    baseband.

    Raises
    ------
    ShearAlignmentError, DelayTooSmallError
    """
    grid = state.grid1 if settings.sheared_photon == "signal" else state.grid2
    m = shear_step_count(settings, grid)
    axis = 0 if settings.sheared_photon == "signal" else 1
    min_delay = 4.0 * _transform_limited_fwhm(state, axis)
    if settings.delay == 0.0 or abs(settings.delay) <= min_delay:
        raise DelayTooSmallError(
            f"|delay| = {abs(settings.delay):g} fs does not exceed 4x the "
            f"sheared photon's transform-limited temporal FWHM "
            f"({min_delay:g} fs); sidebands would overlap the baseband"
        )
    return m


def _shifted(arr: np.ndarray, m: int) -> np.ndarray:
    """arr evaluated m samples ahead along axis 0, zero-filled at the end."""
    if m == 0:
        return arr.copy()
    out = np.zeros_like(arr)
    if m > 0:
        out[:-m] = arr[m:]
    else:
        out[-m:] = arr[:m]
    return out


def _pattern_parts(
    state: BiphotonState, settings: ShearSettings
) -> tuple[np.ndarray, np.ndarray, BiphotonState]:
    """Non-interfering part A and fringe amplitude B, measurement-ordered.

    The detected pattern at fringe phase theta is A + Re(B*exp(i*theta));
    A >= |B| pointwise.
    """
    ms = _measurement_state(state, settings)
    m = shear_step_count(settings, ms.grid1)
    amp = ms.amplitude
    jsi = np.abs(amp) ** 2
    amp_shift = _shifted(amp, m)
    carrier = np.exp(1j * ms.grid1.detunings() * settings.delay)
    a_part = 0.25 * (jsi + np.abs(amp_shift) ** 2)
    b_part = 0.5 * amp * np.conj(amp_shift) * carrier[:, None]
    return a_part, b_part, ms


def expected_pattern(
    state: BiphotonState, settings: ShearSettings, fringe_phase_offset: float = 0.0
) -> np.ndarray:
    """Ideal (unblurred) coincidence pattern at a fixed fringe phase.

    Returns a non-negative matrix on the model grids, measurement-ordered:
    axis 0 is the sheared photon's frequency, axis 1 the herald's. Shear
    alignment is validated; the delay rule is not (a dense pattern is
    well-defined for any delay).
    """
    a_part, b_part, _ = _pattern_parts(state, settings)
    out = a_part + (b_part * np.exp(1j * fringe_phase_offset)).real
    np.maximum(out, 0.0, out=out)  # clip -1e-12-scale roundoff
    return out


def _blur_sigmas_cells(
    det: DetectorModel, grid1: FrequencyGrid, grid2: FrequencyGrid
) -> tuple[float, float]:
    s1 = fwhm_to_sigma(
        bandwidth_to_angular(det.resolution_sheared, wavelength_from_omega(grid1.center))
    )
    s2 = fwhm_to_sigma(
        bandwidth_to_angular(det.resolution_herald, wavelength_from_omega(grid2.center))
    )
    return s1 / grid1.step, s2 / grid2.step


def detector_blur(
    values: np.ndarray,
    det: DetectorModel,
    grid1: FrequencyGrid,
    grid2: FrequencyGrid,
) -> np.ndarray:
    """Apply the two spectrometer point-spread functions to a pattern.

    Gaussian blur with the sheared-arm resolution along axis 0 and the
    herald resolution along axis 1 (both FWHM -> sigma in grid cells).
    The kernel is truncated at 7 sigma, so it conserves total probability
    to well below 1e-9 away from the grid edges. Works on real or complex
    input.
    """
    sigma = _blur_sigmas_cells(det, grid1, grid2)
    if np.iscomplexobj(values):
        return detector_blur(values.real, det, grid1, grid2) + 1j * detector_blur(
            values.imag, det, grid1, grid2
        )
    return gaussian_filter(values, sigma=sigma, mode="constant", truncate=BLUR_TRUNCATE)


def _window_masks(
    det: DetectorModel, grid1: FrequencyGrid, grid2: FrequencyGrid
) -> tuple[np.ndarray, np.ndarray]:
    lo = omega_from_wavelength(det.spectral_range[1])
    hi = omega_from_wavelength(det.spectral_range[0])
    w1 = (grid1.absolute() >= lo) & (grid1.absolute() <= hi)
    w2 = (grid2.absolute() >= lo) & (grid2.absolute() <= hi)
    return w1, w2


def detected_pattern(
    state: BiphotonState,
    settings: ShearSettings,
    det: DetectorModel,
    fringe_phase_offset: float = 0.0,
) -> np.ndarray:
    """Expected pattern after detector blur and the acceptance window.

    Measurement-ordered, at model-grid resolution; the same density the
    Monte-Carlo sampler draws events from (at a frozen fringe phase).
    """
    a_part, b_part, ms = _pattern_parts(state, settings)
    a_blur = detector_blur(a_part, det, ms.grid1, ms.grid2)
    b_blur = detector_blur(b_part, det, ms.grid1, ms.grid2)
    out = a_blur + (b_blur * np.exp(1j * fringe_phase_offset)).real
    np.maximum(out, 0.0, out=out)
    w1, w2 = _window_masks(det, ms.grid1, ms.grid2)
    return out * (w1[:, None] & w2[None, :])


def _next_pow2(n: int) -> int:
    return max(8, 1 << (max(1, n) - 1).bit_length())


def detector_grids(
    det: DetectorModel, state: BiphotonState, settings: ShearSettings
) -> tuple[FrequencyGrid, FrequencyGrid]:
    """Detector bin grids (sheared arm, herald arm) for a measurement.

    Bin widths equal the spectrometer resolutions converted to rad/fs at
    each photon's carrier; bin counts are the smallest powers of two that
    cover the spectral acceptance window.
    """
    ms_grid1 = state.grid1 if settings.sheared_photon == "signal" else state.grid2
    ms_grid2 = state.grid2 if settings.sheared_photon == "signal" else state.grid1
    span = omega_from_wavelength(det.spectral_range[0]) - omega_from_wavelength(
        det.spectral_range[1]
    )
    grids = []
    for grid, resolution in (
        (ms_grid1, det.resolution_sheared),
        (ms_grid2, det.resolution_herald),
    ):
        step = bandwidth_to_angular(resolution, wavelength_from_omega(grid.center))
        count = _next_pow2(int(math.ceil(span / step)) + 1)
        grids.append(FrequencyGrid(grid.center, step, count))
    return grids[0], grids[1]


def _bin_map(model_grid: FrequencyGrid, bin_grid: FrequencyGrid) -> np.ndarray:
    """Nearest detector bin of each model cell; -1 where out of range."""
    rel = (model_grid.detunings() + (model_grid.center - bin_grid.center)) / bin_grid.step
    idx = np.floor(rel + 0.5).astype(np.int64) + bin_grid.count // 2
    idx[(idx < 0) | (idx >= bin_grid.count)] = -1
    return idx


def simulate_events(
    state: BiphotonState,
    settings: ShearSettings,
    det: DetectorModel,
    drift: DriftModel,
    duration: float,
    seed: "int | np.random.SeedSequence",
) -> EventStream:
    """Monte-Carlo realization of one acquisition.

    Draws ``Poisson(coincidence_rate * duration)`` events with sorted
    uniform arrival times, evolves the fringe phase between events as a
    Wiener process, and samples each event's detector bins from the
    blurred, windowed pattern frozen at its arrival time (rejection
    sampling under the drift-free envelope A + |B|, which dominates the
    pattern at every fringe phase). Deterministic for a given seed; the
    drift realization uses ``drift.seed`` when set, otherwise a child of
    ``seed``.

    Raises
    ------
    EmptyAcceptanceWindowError
        If no grid cell survives the acceptance window, or the windowed
        pattern integrates to zero.
    """
    if not duration > 0.0:
        raise ValueError("duration must be positive")
    validate_shear(settings, state)

    a_part, b_part, ms = _pattern_parts(state, settings)
    a_blur = detector_blur(a_part, det, ms.grid1, ms.grid2)
    b_blur = detector_blur(b_part, det, ms.grid1, ms.grid2)
    w1, w2 = _window_masks(det, ms.grid1, ms.grid2)
    if not w1.any() or not w2.any():
        raise EmptyAcceptanceWindowError(
            f"no grid sample falls inside the acceptance window "
            f"{det.spectral_range} nm"
        )

    sheared_grid, herald_grid = detector_grids(det, state, settings)
    map1 = _bin_map(ms.grid1, sheared_grid)
    map2 = _bin_map(ms.grid2, herald_grid)
    valid = (
        (w1 & (map1 >= 0))[:, None]
        & (w2 & (map2 >= 0))[None, :]
        & (a_blur > 0.0)
    )
    i1_flat, i2_flat = np.nonzero(valid)
    env = (a_blur + np.abs(b_blur))[valid]
    total = float(env.sum())
    if not i1_flat.size or total <= 0.0:
        raise EmptyAcceptanceWindowError(
            "pattern integrates to zero within the acceptance window"
        )
    a_flat = a_blur[valid]
    b_flat = b_blur[valid]
    cdf = np.cumsum(env)
    cdf /= cdf[-1]

    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    event_ss, drift_fallback = ss.spawn(2)
    drift_ss = (
        np.random.SeedSequence(drift.seed) if drift.seed is not None else drift_fallback
    )
    rng = np.random.default_rng(event_ss)
    drift_rng = np.random.default_rng(drift_ss)

    n = int(rng.poisson(det.coincidence_rate * duration))
    times = np.sort(rng.uniform(0.0, duration, n))
    dup = np.flatnonzero(np.diff(times) <= 0.0)
    while dup.size:  # float ties are astronomically rare but forbidden
        times[dup + 1] = np.nextafter(times[dup], np.inf)
        dup = np.flatnonzero(np.diff(times) <= 0.0)

    if drift.kind == "none" or drift.diffusion == 0.0 or n == 0:
        theta = np.zeros(n)
    else:
        steps = np.sqrt(drift.diffusion * np.diff(times, prepend=0.0))
        theta = np.cumsum(drift_rng.standard_normal(n) * steps)

    phasor = np.exp(1j * theta)
    cell = np.empty(n, dtype=np.int64)
    pending = np.arange(n)
    while pending.size:
        cand = np.searchsorted(cdf, rng.uniform(0.0, 1.0, pending.size))
        accept_p = (a_flat[cand] + (b_flat[cand] * phasor[pending]).real) / env[cand]
        keep = rng.uniform(0.0, 1.0, pending.size) < accept_p
        cell[pending[keep]] = cand[keep]
        pending = pending[~keep]

    return EventStream(
        configuration=settings.configuration,
        settings=settings,
        sheared_grid=sheared_grid,
        herald_grid=herald_grid,
        bin1=map1[i1_flat[cell]].astype(np.uint16),
        bin2=map2[i2_flat[cell]].astype(np.uint16),
        timestamps=times,
    )


def histogram(events: EventStream, subset_size: int) -> list[Interferogram]:
    """Bin an event stream into consecutive equal-size interferograms.

    The stream is split into disjoint subsets of exactly ``subset_size``
    consecutive events (the final partial subset is discarded) and each
    subset is histogrammed on the detector grids.

    Raises
    ------
    DegenerateHistogramError
        If the stream holds fewer than one full subset.
    """
    if subset_size < MIN_SUBSET_SIZE:
        raise ValueError(f"subset_size must be >= {MIN_SUBSET_SIZE}, got {subset_size}")
    n_subsets = len(events) // subset_size
    if n_subsets == 0:
        raise DegenerateHistogramError(
            f"stream has {len(events)} events, fewer than one subset of {subset_size}"
        )
    n1 = events.sheared_grid.count
    n2 = events.herald_grid.count
    grams = []
    for k in range(n_subsets):
        sl = slice(k * subset_size, (k + 1) * subset_size)
        flat = events.bin1[sl].astype(np.int64) * n2 + events.bin2[sl].astype(np.int64)
        counts = np.bincount(flat, minlength=n1 * n2).reshape(n1, n2)
        grams.append(
            Interferogram(
                counts=counts,
                settings=events.settings,
                bin_grids=(events.sheared_grid, events.herald_grid),
                total_events=subset_size,
            )
        )
    return grams
