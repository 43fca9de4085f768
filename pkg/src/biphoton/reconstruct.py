"""Recover the complex joint spectral amplitude from interferograms.

The measured pattern carries the phase difference between a photon's
spectrum and its sheared copy as a fringe along the sheared axis. Per
acquisition subset, the pipeline is:

1. Fourier transform each interferogram along the sheared axis, isolate
   the sideband at the configured delay, and report its fringe contrast
   (:func:`extract_sideband`).
2. Gate subsets on contrast to drop drift-corrupted acquisitions
   (:func:`gate_subsets`).
3. Remove the delay carrier and read the wrapped phase difference
   ``dphi(w1, w2) = phi(w1, w2) - phi(w1 + shear, w2)`` on signal-bearing
   bins (:func:`phase_differential`).
4. Either fit the difference surfaces directly (default), or first
   assemble ``phi`` by chain concatenation along the sheared axis
   (:func:`concatenate_phase`), then fit polynomial phase coefficients by
   weighted least squares (:func:`fit_coefficients`).
5. Merge the two interferometer configurations (each photon sheared in
   turn) into one complex state and analyze its mode structure
   (:func:`merge_configurations`, :func:`analyze`).

Each configuration determines the phase only up to an additive function
of the heralded frequency; the swapped configuration supplies exactly the
missing part, which is why both are required for a complete state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateHistogramError,
    NoSubsetsAcceptedError,
    ShearAlignmentError,
    SidebandMisalignedError,
)
from .interferometer import (
    IDLER_IN_EOSI,
    SIGNAL_IN_EOSI,
    EventStream,
    Interferogram,
    ShearSettings,
    expected_pattern,
    histogram,
)
from .model import (
    VIEW_KINDS,
    BiphotonState,
    FrequencyGrid,
    SchmidtSpectrum,
    TimeFrequencyView,
    effective_schmidt_rank,
    modulus_only,
    schmidt_decompose,
    to_time_frequency,
)

__all__ = [
    "SidebandExtraction",
    "PhaseSurface",
    "FitReport",
    "ConfigurationResult",
    "MergeResult",
    "ReconstructionResult",
    "AnalysisSummary",
    "CONTRAST_SCALE",
    "DEFAULT_CONTRAST_THRESHOLD",
    "extract_sideband",
    "extract_sideband_dense",
    "gate_subsets",
    "phase_differential",
    "concatenate_phase",
    "fit_coefficients",
    "reconstruct_configuration",
    "dense_configuration",
    "merge_configurations",
    "summarize_reconstruction",
    "analyze",
]

# A full-visibility noiseless pattern yields sideband/baseband magnitude
# ratio 1/2 (the fringe term carries half the pattern's weight), so 0.5 is
# the ceiling of the contrast scale and gate thresholds are quoted as a
# fraction of it.
CONTRAST_SCALE = 0.5

DEFAULT_CONTRAST_THRESHOLD = 0.20

# Bins below this fraction of their herald column's peak baseband
# intensity carry no usable phase and are masked out.
MASK_FLOOR = 0.05

# Connected runs of masked bins shorter than this cannot support a
# trustworthy unwrap and are dropped from the mask.
MIN_SEGMENT_BINS = 3


@dataclass(frozen=True, eq=False)
class SidebandExtraction:
    """One subset's isolated fringe sideband.

    ``filtered_complex[i, j]`` is the inverse transform of the sideband at
    the configured delay; its argument carries the fringe phase at sheared
    bin i, herald bin j. ``baseband_intensity`` is the inverse transform
    of the low-frequency block, a drift-free estimate of the
    non-interfering part of the pattern. ``contrast`` is the herald-pooled
    sideband-to-baseband magnitude ratio (0.5 = full visibility) and
    ``sideband_location`` the delay at which the pooled sideband peaks.
    """

    filtered_complex: np.ndarray = field(repr=False)
    baseband_intensity: np.ndarray = field(repr=False)
    contrast: float
    sideband_location: float
    sheared_grid: FrequencyGrid
    herald_grid: FrequencyGrid
    settings: ShearSettings


@dataclass(frozen=True, eq=False)
class PhaseSurface:
    """A sampled phase with a validity mask.

    ``values[i, j]`` holds the phase (rad) at sheared bin i and herald bin
    j and is meaningful only where ``mask`` is True. ``weight`` is the
    associated intensity estimate used for masking and least-squares
    weighting. ``reference_note`` records which additive reference is
    undetermined.
    """

    values: np.ndarray = field(repr=False)
    mask: np.ndarray = field(repr=False)
    weight: np.ndarray = field(repr=False)
    grid1: FrequencyGrid
    grid2: FrequencyGrid
    reference_note: str


@dataclass(frozen=True, eq=False)
class FitReport:
    """Polynomial phase coefficients, aggregated over accepted subsets.

    Coefficients are labeled in source-state coordinates regardless of
    which photon was sheared: ``phi20`` multiplies dw1^2 (signal),
    ``phi02`` dw2^2 (idler), ``phi11`` the cross term. A single
    configuration measures ``phi11`` and the sheared photon's own
    quadratic; the other slots are None. Each coefficient is the mean of
    the per-subset fits and its sigma the standard error of that mean
    (across-subset std / sqrt(n); NaN with fewer than two subsets), so
    the error bar shrinks as 1/sqrt(n_subsets). Cubic coefficients are
    populated only for degree-3 fits.
    """

    configuration: str
    phi11: float
    phi11_sigma: float
    phi20: float | None
    phi20_sigma: float | None
    phi02: float | None
    phi02_sigma: float | None
    n_subsets_used: int
    n_subsets_rejected: int
    degree: int = 2
    phi30: float | None = None
    phi30_sigma: float | None = None
    phi21: float | None = None
    phi21_sigma: float | None = None
    phi12: float | None = None
    phi12_sigma: float | None = None
    phi03: float | None = None
    phi03_sigma: float | None = None
    per_subset: dict = field(default_factory=dict, repr=False)


@dataclass(frozen=True, eq=False)
class ConfigurationResult:
    """Everything one interferometer configuration contributes to a merge."""

    configuration: str
    fit: FitReport
    sheared_grid: FrequencyGrid
    herald_grid: FrequencyGrid
    sheared_marginal: np.ndarray = field(repr=False)
    contrasts: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class MergeResult:
    """Merged two-configuration reconstruction.

    ``state`` combines the fine-resolution modulus marginals of both
    configurations with the fitted polynomial phase; ``replicates`` are
    per-subset-pair variants of the state used for error bars.
    ``inconsistent`` flags cross-term estimates that disagree beyond three
    combined standard deviations.
    """

    state: BiphotonState
    replicates: tuple[BiphotonState, ...] = field(repr=False)
    phi11: float
    phi11_sigma: float
    inconsistent: bool
    fits: tuple[FitReport, FitReport]


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    """Reconstructed state with its mode analysis and uncertainties."""

    jsa: BiphotonState
    fits: tuple[FitReport, FitReport]
    schmidt: SchmidtSpectrum
    k_full: float
    k_full_sigma: float
    k_modulus: float
    k_modulus_sigma: float
    schmidt_sigmas: np.ndarray = field(repr=False)
    phi11: float
    phi11_sigma: float
    inconsistent: bool

    def __post_init__(self) -> None:
        if self.k_full < 1.0 - 1e-6 or self.k_modulus < 1.0 - 1e-6:
            raise ValueError("effective mode counts must be >= 1")


@dataclass(frozen=True, eq=False)
class AnalysisSummary:
    """First Schmidt values with error bars, mode counts, and the views."""

    schmidt_values: np.ndarray
    schmidt_sigmas: np.ndarray
    k_full: float
    k_full_sigma: float
    k_modulus: float
    k_modulus_sigma: float
    views: tuple[TimeFrequencyView, ...]


def _delay_axis(count: int, step: float) -> np.ndarray:
    """Fourier-conjugate delay (fs) of each transform sample."""
    return 2.0 * math.pi * np.fft.fftfreq(count, d=step)


def _extract_core(
    values: np.ndarray,
    sheared_grid: FrequencyGrid,
    herald_grid: FrequencyGrid,
    settings: ShearSettings,
    max_peak_offset_samples: "float | None" = 1.0,
) -> SidebandExtraction:
    if not np.any(values):
        raise DegenerateHistogramError("interferogram holds no counts")
    tau = settings.delay
    spectrum = np.fft.fft(values, axis=0)
    delays = _delay_axis(values.shape[0], sheared_grid.step)
    sample = abs(delays[1] - delays[0])

    lo, hi = sorted((0.5 * tau, 1.5 * tau))
    side_mask = (delays >= lo) & (delays <= hi)
    if not side_mask.any():
        raise SidebandMisalignedError(
            f"no transform sample falls in the sideband window around {tau:g} fs"
        )
    pooled = np.abs(spectrum.sum(axis=1))
    side_idx = np.flatnonzero(side_mask)
    peak = side_idx[np.argmax(pooled[side_idx])]
    location = float(delays[peak])
    contrast = float(pooled[peak] / pooled[0])
    if (
        max_peak_offset_samples is not None
        and abs(location - tau) > max_peak_offset_samples * sample * (1.0 + 1e-9)
    ):
        raise SidebandMisalignedError(
            f"pooled sideband peaks at {location:g} fs, more than "
            f"{max_peak_offset_samples:g} sample(s) ({sample:g} fs each) from "
            f"the configured delay {tau:g} fs (contrast {contrast:.3f}); "
            "fringes are washed out or the delay is wrong"
        )

    filtered = np.fft.ifft(np.where(side_mask[:, None], spectrum, 0.0), axis=0)
    base_mask = np.abs(delays) < abs(0.5 * tau)
    baseband = np.fft.ifft(np.where(base_mask[:, None], spectrum, 0.0), axis=0).real
    np.maximum(baseband, 0.0, out=baseband)
    return SidebandExtraction(
        filtered_complex=filtered,
        baseband_intensity=baseband,
        contrast=contrast,
        sideband_location=location,
        sheared_grid=sheared_grid,
        herald_grid=herald_grid,
        settings=settings,
    )


def extract_sideband(gram: Interferogram) -> SidebandExtraction:
    """Isolate the fringe sideband of one interferogram.

    Fourier transform along the sheared axis, keep the samples within half
    a delay of the configured delay (the positive-delay sideband by
    convention), and transform back. The fringe contrast is the
    herald-pooled sideband peak magnitude over the zero-delay magnitude.

    Raises
    ------
    DegenerateHistogramError
        If the interferogram is identically zero.
    SidebandMisalignedError
        If the pooled sideband peak sits more than one transform sample
        from the configured delay (fringe washout, or a wrong delay).
    """
    return _extract_core(
        gram.counts.astype(float), gram.bin_grids[0], gram.bin_grids[1], gram.settings
    )


def extract_sideband_dense(
    pattern: np.ndarray,
    sheared_grid: FrequencyGrid,
    herald_grid: FrequencyGrid,
    settings: ShearSettings,
) -> SidebandExtraction:
    """:func:`extract_sideband` for a dense real-valued pattern matrix.

    No peak-location gate is applied: a dense ideal pattern has no drift
    to detect, and a strong quadratic phase legitimately displaces the
    fringe carrier within the sideband window (by twice the sheared
    photon's own chirp times the shear).
    """
    return _extract_core(
        np.asarray(pattern, float), sheared_grid, herald_grid, settings,
        max_peak_offset_samples=None,
    )


def gate_subsets(
    extractions: list[SidebandExtraction],
    threshold: float = DEFAULT_CONTRAST_THRESHOLD,
) -> list[SidebandExtraction]:
    """Keep subsets whose contrast reaches ``threshold`` of the 0.5 ceiling.

    Raises
    ------
    NoSubsetsAcceptedError
        If every subset falls below the gate.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    gate = threshold * CONTRAST_SCALE
    accepted = [e for e in extractions if e.contrast >= gate]
    if not accepted:
        contrasts = ", ".join(f"{e.contrast:.3f}" for e in extractions)
        raise NoSubsetsAcceptedError(
            f"no subset reaches the contrast gate {gate:.3f} "
            f"(= {threshold:.2f} of the 0.5 scale); contrasts: [{contrasts}]"
        )
    return accepted


def _masked_runs(mask_column: np.ndarray) -> list[np.ndarray]:
    """Index arrays of each contiguous True run in a boolean vector."""
    idx = np.flatnonzero(mask_column)
    if idx.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(idx) > 1)
    return [run for run in np.split(idx, breaks + 1)]


def _unwrap_from_anchor(values: np.ndarray, anchor: int) -> np.ndarray:
    """1D unwrap outward from ``anchor`` so errors at weak ends stay local."""
    out = values.copy()
    out[anchor:] = np.unwrap(values[anchor:])
    out[: anchor + 1] = np.unwrap(values[anchor::-1])[::-1]
    return out


def phase_differential(
    ext: SidebandExtraction, settings: ShearSettings
) -> PhaseSurface:
    """Wrapped phase difference surface of one extraction.

    Removes the delay carrier ``exp(i*dw1*delay)`` (detuning convention,
    exact configured delay), rotates the global phase so the
    intensity-weighted circular mean sits at zero (a constant absorbed in
    the unknown reference; without it, a drift mean near +-pi would wrap
    catastrophically), and reads the argument. Bins below 5% of their
    herald column's peak baseband intensity are masked out; within each
    column the phase is unwrapped along the sheared axis separately on
    every contiguous masked run, starting at the run's strongest bin so a
    noisy edge cannot corrupt the interior. Runs shorter than 3 bins are
    dropped as unverifiable.
    """
    d1 = ext.sheared_grid.detunings()
    c = ext.filtered_complex * np.exp(-1j * d1 * settings.delay)[:, None]
    weight = ext.baseband_intensity

    mask = np.zeros(c.shape, dtype=bool)
    col_peak = weight.max(axis=0)
    nonzero = col_peak > 0.0
    mask[:, nonzero] = weight[:, nonzero] >= MASK_FLOOR * col_peak[nonzero]

    rot = (weight * c)[mask].sum()
    if abs(rot) > 0.0:
        c = c * np.conj(rot / abs(rot))

    values = np.angle(c)
    out_mask = np.zeros_like(mask)
    for col in range(values.shape[1]):
        if not mask[:, col].any():
            continue
        for run in _masked_runs(mask[:, col]):
            if run.size < MIN_SEGMENT_BINS:
                continue
            anchor = int(np.argmax(weight[run, col]))
            values[run, col] = _unwrap_from_anchor(values[run, col], anchor)
            out_mask[run, col] = True
    values = np.where(out_mask, values, 0.0)
    return PhaseSurface(
        values=values,
        mask=out_mask,
        weight=weight,
        grid1=ext.sheared_grid,
        grid2=ext.herald_grid,
        reference_note=(
            "phase difference across one shear; defined up to a constant "
            "(fringe drift mean and carrier origin)"
        ),
    )


def concatenate_phase(dphi: PhaseSurface, settings: ShearSettings) -> PhaseSurface:
    """Assemble ``phi`` from shear differences along the sheared axis.

    With the shear spanning m bins, ``phi[j + m] = phi[j] - dphi[j]``
    defines m interleaved chains per herald column. Chains break at masked
    gaps; the resulting fragments are joined by least squares against a
    shared smooth quadratic (per column), which fixes their relative
    offsets deterministically. Gaps wider than m bins disconnect a column;
    only its largest connected segment is kept. Each column is anchored to
    phi = 0 at its intensity center-of-mass bin, leaving an additive
    function of the herald frequency undetermined.

    Raises
    ------
    ShearAlignmentError
        If the shear is not a positive integer number of surface bins.
    """
    ratio = settings.shear / dphi.grid1.step
    m = round(ratio)
    if m < 1 or abs(ratio - m) > 1e-9 * max(1.0, abs(ratio)):
        raise ShearAlignmentError(
            f"shear spans {ratio:.9f} surface bins; concatenation needs a "
            "positive integer"
        )

    n1, n2 = dphi.values.shape
    x = dphi.grid1.detunings()
    out_values = np.zeros((n1, n2))
    out_mask = np.zeros((n1, n2), dtype=bool)

    for col in range(n2):
        valid = np.flatnonzero(dphi.mask[:, col])
        if valid.size == 0:
            continue
        # Split where a masked gap spans >= m bins; keep the largest part.
        breaks = np.flatnonzero(np.diff(valid) > m)
        segments = np.split(valid, breaks + 1)
        segment = max(segments, key=len)
        seg_set = set(segment.tolist())

        # Walk each interleaved chain, integrating phi over its fragments.
        phi = {}
        fragment_of = {}
        n_frag = 0
        for start in segment:
            if start in phi or (start - m) in seg_set:
                continue  # not a fragment head
            j = int(start)
            phi[j] = 0.0
            fragment_of[j] = n_frag
            while j in seg_set and (j + m) in seg_set:
                phi[j + m] = phi[j] - dphi.values[j, col]
                fragment_of[j + m] = n_frag
                j += m
            n_frag += 1

        bins = np.array(sorted(phi), dtype=int)
        vals = np.array([phi[j] for j in bins])
        frags = np.array([fragment_of[j] for j in bins])
        w = np.sqrt(dphi.weight[bins, col])

        if n_frag > 1:
            # Offsets per fragment against a shared smooth quadratic
            # (no constant term: one offset plays that role).
            design = np.zeros((bins.size, n_frag + 2))
            design[np.arange(bins.size), frags] = 1.0
            design[:, n_frag] = -x[bins]
            design[:, n_frag + 1] = -x[bins] ** 2
            sol, *_ = np.linalg.lstsq(design * w[:, None], -vals * w, rcond=None)
            vals = vals + sol[frags]

        com = float((dphi.weight[bins, col] * bins).sum()) / float(
            dphi.weight[bins, col].sum()
        )
        anchor = bins[np.argmin(np.abs(bins - com))]
        vals = vals - vals[bins.searchsorted(anchor)]
        out_values[bins, col] = vals
        out_mask[bins, col] = True

    return PhaseSurface(
        values=out_values,
        mask=out_mask,
        weight=dphi.weight,
        grid1=dphi.grid1,
        grid2=dphi.grid2,
        reference_note=(
            "additive function of the herald frequency unknown; each column "
            "anchored to 0 at its center-of-mass bin"
        ),
    )


def _nanstat(samples: np.ndarray) -> tuple[float, float]:
    """Mean and standard error of the mean (NaN below two samples)."""
    if samples.size >= 2:
        sem = np.std(samples, ddof=1) / math.sqrt(samples.size)
        return float(np.mean(samples)), float(sem)
    return float(samples[0]), float("nan")


def _fit_one_differential(
    surface: PhaseSurface, omega: float, degree: int
) -> dict[str, float]:
    x = surface.grid1.detunings()[:, None] + np.zeros_like(surface.values)
    y = surface.grid2.detunings()[None, :] + np.zeros_like(surface.values)
    sel = surface.mask
    xv, yv, pv = x[sel], y[sel], surface.values[sel]
    w = np.sqrt(surface.weight[sel])
    cols = [np.ones_like(xv), xv, yv]
    if degree == 3:
        cols += [xv**2, xv * yv, yv**2]
    design = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(design * w[:, None], pv * w, rcond=None)
    out = {}
    if degree == 3:
        c30 = -coef[3] / (3.0 * omega)
        c21 = -coef[4] / (2.0 * omega)
        c12 = -coef[5] / omega
        out["c30"], out["c21"], out["c12"] = c30, c21, c12
        out["c20"] = -(coef[1] + 3.0 * c30 * omega**2) / (2.0 * omega)
        out["c11"] = -(coef[2] + c21 * omega**2) / omega
    else:
        out["c20"] = -coef[1] / (2.0 * omega)
        out["c11"] = -coef[2] / omega
    return out


def _fit_one_concatenated(
    surface: PhaseSurface, degree: int
) -> dict[str, float]:
    sel = surface.mask
    if not sel.any():
        raise ValueError("empty mask: nothing to fit")
    rows, cols_idx = np.nonzero(sel)
    x = surface.grid1.detunings()[rows]
    y = surface.grid2.detunings()[cols_idx]
    pv = surface.values[sel]
    wv = surface.weight[sel]
    n2 = surface.values.shape[1]

    # One free offset per herald column stands in for the unknown additive
    # reference. Solving for the offsets explicitly would need a huge
    # sparse design, but they can be eliminated exactly: subtracting the
    # weighted column mean from the response and from every shared
    # regressor yields the same shared-coefficient estimate.
    wsum = np.bincount(cols_idx, weights=wv, minlength=n2)
    scale = np.where(wsum > 0.0, wsum, 1.0)

    def centered(v: np.ndarray) -> np.ndarray:
        means = np.bincount(cols_idx, weights=wv * v, minlength=n2) / scale
        return v - means[cols_idx]

    shared = [x, x**2, x * y]
    if degree == 3:
        shared += [x**3, x**2 * y, x * y**2]
    design = np.stack([centered(s) for s in shared], axis=1)
    sqw = np.sqrt(wv)
    coef, *_ = np.linalg.lstsq(design * sqw[:, None], centered(pv) * sqw, rcond=None)
    out = {"c20": float(coef[1]), "c11": float(coef[2])}
    if degree == 3:
        out["c30"] = float(coef[3])
        out["c21"] = float(coef[4])
        out["c12"] = float(coef[5])
    return out


def fit_coefficients(
    surfaces: "PhaseSurface | list[PhaseSurface]",
    settings: ShearSettings,
    differential: bool = True,
    degree: int = 2,
    n_rejected: int = 0,
) -> FitReport:
    """Weighted least-squares phase coefficients over accepted subsets.

    With ``differential=True`` the input surfaces are shear differences
    and the polynomial coefficients follow from the finite-difference
    model ``dphi = phi(w1) - phi(w1 + shear)`` (the constant absorbs the
    fringe drift mean together with the linear delay term, which is why
    those are not reported). Otherwise the surfaces are concatenated
    phases, fitted with a free offset per herald column standing in for
    the unknown additive reference.

    Each subset is fitted independently; the report carries the mean and
    the standard error of the mean of every coefficient, labeled in
    source-state coordinates (the sheared photon's own quadratic fills
    ``phi20`` or ``phi02`` according to the configuration). ``degree=3``
    adds the cubic terms.
    """
    if degree not in (2, 3):
        raise ValueError(f"degree must be 2 or 3, got {degree}")
    if settings.shear == 0.0:
        raise ValueError("coefficients are not identifiable at zero shear")
    if isinstance(surfaces, PhaseSurface):
        surfaces = [surfaces]
    if not surfaces:
        raise NoSubsetsAcceptedError("no accepted subsets to fit")

    per: dict[str, list[float]] = {}
    for surface in surfaces:
        if not surface.mask.any():
            raise ValueError("empty mask: nothing to fit")
        if differential:
            one = _fit_one_differential(surface, settings.shear, degree)
        else:
            one = _fit_one_concatenated(surface, degree)
        for key, value in one.items():
            per.setdefault(key, []).append(float(value))

    stats = {key: _nanstat(np.asarray(vals)) for key, vals in per.items()}
    signal_sheared = settings.sheared_photon == "signal"

    # Measured-frame -> source-frame relabeling: the fit's "axis 1" is
    # whichever photon was sheared.
    def slot(meas_key: str) -> tuple[float, float]:
        return stats[meas_key]

    phi11, phi11_sigma = slot("c11")
    quad, quad_sigma = slot("c20")
    report = {
        "configuration": settings.configuration,
        "phi11": phi11,
        "phi11_sigma": phi11_sigma,
        "phi20": quad if signal_sheared else None,
        "phi20_sigma": quad_sigma if signal_sheared else None,
        "phi02": None if signal_sheared else quad,
        "phi02_sigma": None if signal_sheared else quad_sigma,
        "n_subsets_used": len(surfaces),
        "n_subsets_rejected": n_rejected,
        "degree": degree,
    }
    if degree == 3:
        c30, s30 = slot("c30")
        c21, s21 = slot("c21")
        c12, s12 = slot("c12")
        if signal_sheared:
            report.update(
                phi30=c30, phi30_sigma=s30, phi21=c21, phi21_sigma=s21,
                phi12=c12, phi12_sigma=s12,
            )
        else:
            report.update(
                phi03=c30, phi03_sigma=s30, phi12=c21, phi12_sigma=s21,
                phi21=c12, phi21_sigma=s12,
            )
    per_subset = {key: np.asarray(vals) for key, vals in per.items()}
    per_subset["phi11"] = per_subset.pop("c11")
    per_subset["quadratic"] = per_subset.pop("c20")
    return FitReport(**report, per_subset=per_subset)


def _deshear_marginal(
    marginal: np.ndarray, shear: float, grid: FrequencyGrid
) -> np.ndarray:
    """Undo the shear smearing of the baseband marginal estimate.

    The non-interfering pattern part averages the spectrum with its
    sheared copy, so its sheared-axis marginal is (M[i] + M[i+m])/2 with
    the shear spanning m bins. Dividing that averaging filter out in the
    Fourier domain is well conditioned here: its zero sits at delay
    pi/shear, far beyond the band the baseband window keeps. Returned
    unchanged when the shear is not a whole number of bins.
    """
    ratio = shear / grid.step
    m = round(ratio)
    if m == 0 or abs(ratio - m) > 1e-6 * max(1.0, abs(ratio)):
        return marginal
    transfer = 0.5 * (1.0 + np.exp(2j * np.pi * m * np.fft.fftfreq(marginal.size)))
    safe = np.abs(transfer) > 0.1
    spectrum = np.where(
        safe, np.fft.fft(marginal) / np.where(safe, transfer, 1.0), 0.0
    )
    return np.clip(np.fft.ifft(spectrum).real, 0.0, None)


def reconstruct_configuration(
    events: EventStream,
    subset_size: int = 5000,
    threshold: float = DEFAULT_CONTRAST_THRESHOLD,
    degree: int = 2,
) -> ConfigurationResult:
    """Full single-configuration pipeline from an event stream.

    Histogram into subsets, extract sidebands (subsets whose sideband peak
    is displaced count as rejected), gate on contrast, build phase
    difference surfaces, and fit. The returned marginal is the pooled
    baseband intensity of the accepted subsets summed over herald bins: a
    drift-free estimate of the sheared photon's marginal spectrum at the
    fine arm resolution.
    """
    grams = histogram(events, subset_size)
    extractions: list[SidebandExtraction] = []
    for gram in grams:
        try:
            extractions.append(extract_sideband(gram))
        except SidebandMisalignedError:
            continue
    if not extractions:
        raise NoSubsetsAcceptedError(
            f"all {len(grams)} subsets have displaced or washed-out sidebands"
        )
    accepted = gate_subsets(extractions, threshold)
    n_rejected = len(grams) - len(accepted)
    surfaces = [phase_differential(e, events.settings) for e in accepted]
    fit = fit_coefficients(
        surfaces, events.settings, differential=True, degree=degree,
        n_rejected=n_rejected,
    )
    marginal = np.zeros(events.sheared_grid.count)
    for e in accepted:
        marginal += e.baseband_intensity.sum(axis=1)
    marginal = _deshear_marginal(marginal, events.settings.shear, events.sheared_grid)
    return ConfigurationResult(
        configuration=events.configuration,
        fit=fit,
        sheared_grid=events.sheared_grid,
        herald_grid=events.herald_grid,
        sheared_marginal=marginal,
        contrasts=np.array([e.contrast for e in extractions]),
    )


def dense_configuration(
    state: BiphotonState, settings: ShearSettings, degree: int = 2
) -> ConfigurationResult:
    """Noiseless single-configuration pipeline on the dense ideal pattern.

    Runs the same extraction and fitting as the event pipeline, but on
    :func:`expected_pattern` at model-grid resolution with no sampling,
    blur, window, or drift; the oracle path for validating the estimator.
    """
    signal_sheared = settings.sheared_photon == "signal"
    grid1 = state.grid1 if signal_sheared else state.grid2
    grid2 = state.grid2 if signal_sheared else state.grid1
    pattern = expected_pattern(state, settings)
    ext = extract_sideband_dense(pattern, grid1, grid2, settings)
    surface = phase_differential(ext, settings)
    fit = fit_coefficients([surface], settings, differential=True, degree=degree)
    marginal = _deshear_marginal(
        ext.baseband_intensity.sum(axis=1), settings.shear, grid1
    )
    return ConfigurationResult(
        configuration=settings.configuration,
        fit=fit,
        sheared_grid=grid1,
        herald_grid=grid2,
        sheared_marginal=marginal,
        contrasts=np.array([ext.contrast]),
    )


def _inverse_variance_mean(
    a: float, sa: float, b: float, sb: float
) -> tuple[float, float]:
    if np.isfinite(sa) and np.isfinite(sb) and sa > 0.0 and sb > 0.0:
        wa, wb = 1.0 / sa**2, 1.0 / sb**2
        return (wa * a + wb * b) / (wa + wb), math.sqrt(1.0 / (wa + wb))
    return 0.5 * (a + b), float("nan")


def _quadratic_phase(
    grid1: FrequencyGrid, grid2: FrequencyGrid,
    phi20: float, phi02: float, phi11: float,
) -> np.ndarray:
    x = grid1.detunings()[:, None]
    y = grid2.detunings()[None, :]
    return phi20 * x**2 + phi02 * y**2 + phi11 * x * y


def _state_from(modulus: np.ndarray, phase: np.ndarray,
                grid1: FrequencyGrid, grid2: FrequencyGrid) -> BiphotonState:
    amp = modulus * np.exp(1j * phase)
    total = np.sum(np.abs(amp) ** 2) * grid1.step * grid2.step
    if total <= 0.0:
        raise DegenerateHistogramError("merged amplitude estimate is zero")
    return BiphotonState(grid1, grid2, amp / math.sqrt(total))


def merge_configurations(
    result_a: ConfigurationResult, result_b: ConfigurationResult
) -> MergeResult:
    """Combine the two sheared-photon configurations into one state.

    Each configuration supplies its own photon's fine-resolution modulus
    marginal and quadratic phase; the shared cross term is the
    inverse-variance weighted mean of the two estimates (flagged
    inconsistent when they differ by more than three combined standard
    deviations, without aborting the merge). The modulus is the square
    root of the separable product of the two drift-free marginals, and
    per-subset-pair replicate states are retained for error bars.
    """
    by_tag = {result_a.configuration: result_a, result_b.configuration: result_b}
    if set(by_tag) != {SIGNAL_IN_EOSI, IDLER_IN_EOSI}:
        raise ValueError(
            "merge needs one signal-sheared and one idler-sheared result, "
            f"got {result_a.configuration!r} and {result_b.configuration!r}"
        )
    sig = by_tag[SIGNAL_IN_EOSI]
    idl = by_tag[IDLER_IN_EOSI]
    assert sig.fit.phi20 is not None and idl.fit.phi02 is not None

    phi11, phi11_sigma = _inverse_variance_mean(
        sig.fit.phi11, sig.fit.phi11_sigma, idl.fit.phi11, idl.fit.phi11_sigma
    )
    spread = sig.fit.phi11 - idl.fit.phi11
    combined = math.hypot(
        sig.fit.phi11_sigma if np.isfinite(sig.fit.phi11_sigma) else 0.0,
        idl.fit.phi11_sigma if np.isfinite(idl.fit.phi11_sigma) else 0.0,
    )
    inconsistent = bool(combined > 0.0 and abs(spread) > 3.0 * combined)

    grid1, grid2 = sig.sheared_grid, idl.sheared_grid
    modulus = np.sqrt(
        np.outer(np.clip(sig.sheared_marginal, 0.0, None),
                 np.clip(idl.sheared_marginal, 0.0, None))
    )
    phase = _quadratic_phase(grid1, grid2, sig.fit.phi20, idl.fit.phi02, phi11)
    state = _state_from(modulus, phase, grid1, grid2)

    sig_11 = sig.fit.per_subset["phi11"]
    idl_11 = idl.fit.per_subset["phi11"]
    sig_20 = sig.fit.per_subset["quadratic"]
    idl_02 = idl.fit.per_subset["quadratic"]
    n_pairs = min(sig_11.size, idl_11.size)
    replicates = []
    if n_pairs >= 2:
        for i in range(n_pairs):
            phase_i = _quadratic_phase(
                grid1, grid2, sig_20[i], idl_02[i], 0.5 * (sig_11[i] + idl_11[i])
            )
            replicates.append(_state_from(modulus, phase_i, grid1, grid2))
    return MergeResult(
        state=state,
        replicates=tuple(replicates),
        phi11=phi11,
        phi11_sigma=phi11_sigma,
        inconsistent=inconsistent,
        fits=(sig.fit, idl.fit),
    )


def summarize_reconstruction(merge: MergeResult, n_values: int = 20) -> ReconstructionResult:
    """Mode analysis of a merged state with subset-replicate error bars."""
    spectrum = schmidt_decompose(merge.state)
    k_full = effective_schmidt_rank(spectrum)
    k_mod = effective_schmidt_rank(schmidt_decompose(modulus_only(merge.state)))

    sigmas = np.full(n_values, float("nan"))
    k_full_sigma = float("nan")
    k_mod_sigma = float("nan")
    if len(merge.replicates) >= 2:
        k_samples = []
        k_mod_samples = []
        value_samples = []
        for rep in merge.replicates:
            rep_spec = schmidt_decompose(rep)
            k_samples.append(effective_schmidt_rank(rep_spec))
            k_mod_samples.append(
                effective_schmidt_rank(schmidt_decompose(modulus_only(rep)))
            )
            vals = rep_spec.values[:n_values]
            value_samples.append(np.pad(vals, (0, n_values - vals.size)))
        # The quoted numbers come from the pooled fit over all subsets, so
        # their error bars are standard errors of the mean, not the
        # single-subset scatter.
        root_n = math.sqrt(len(merge.replicates))
        k_full_sigma = float(np.std(k_samples, ddof=1)) / root_n
        k_mod_sigma = float(np.std(k_mod_samples, ddof=1)) / root_n
        sigmas = np.std(np.stack(value_samples), axis=0, ddof=1) / root_n

    return ReconstructionResult(
        jsa=merge.state,
        fits=merge.fits,
        schmidt=spectrum,
        k_full=k_full,
        k_full_sigma=k_full_sigma,
        k_modulus=k_mod,
        k_modulus_sigma=k_mod_sigma,
        schmidt_sigmas=sigmas,
        phi11=merge.phi11,
        phi11_sigma=merge.phi11_sigma,
        inconsistent=merge.inconsistent,
    )


def analyze(result: ReconstructionResult, n_values: int = 20) -> AnalysisSummary:
    """Summary of a reconstruction: mode spectrum, mode counts, views.

    Returns the first ``n_values`` Schmidt values with their
    subset-replicate error bars, the effective mode count of the complex
    state and of its modulus, and the three time-frequency views of the
    reconstructed state.
    """
    values = result.schmidt.values[:n_values]
    values = np.pad(values, (0, n_values - values.size))
    sigmas = result.schmidt_sigmas[:n_values]
    views = tuple(to_time_frequency(result.jsa, kind) for kind in VIEW_KINDS)
    return AnalysisSummary(
        schmidt_values=values,
        schmidt_sigmas=sigmas,
        k_full=result.k_full,
        k_full_sigma=result.k_full_sigma,
        k_modulus=result.k_modulus,
        k_modulus_sigma=result.k_modulus_sigma,
        views=views,
    )
