"""Two-photon joint spectral amplitude model and mode analysis.

Builds sampled joint spectral amplitudes with Gaussian marginals and a
polynomial spectral phase, decomposes them into orthonormal mode pairs by
singular value decomposition, and maps them between the frequency and time
domains with unitary discrete Fourier transforms.

Conventions
-----------
Frequencies are angular detunings (rad/fs) about each photon's carrier,
sampled on uniform power-of-two grids. The frequency-to-time kernel is
``exp(-i*detuning*t)``; with that choice a cross phase ``c*dw1*dw2`` places
the hybrid time-frequency intensity ridge on the line ``t1 = c*dw2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DecompositionFailedError, GridTooNarrowError, PhaseAliasingError
from .units import bandwidth_to_angular, fwhm_to_sigma, omega_from_wavelength

__all__ = [
    "FrequencyGrid",
    "SourceConfig",
    "BiphotonState",
    "SchmidtSpectrum",
    "TimeFrequencyView",
    "default_grids",
    "build_state",
    "marginal_envelope",
    "modulus_only",
    "schmidt_decompose",
    "effective_schmidt_rank",
    "to_time_frequency",
    "conjugate_time_axis",
]

# Largest tolerated marginal amplitude at a grid edge, relative to peak.
EDGE_DECAY_FLOOR = 1e-6

# Singular values below this fraction of the leading one count as zero.
SCHMIDT_VALUE_FLOOR = 1e-12

VIEW_KINDS = ("joint-temporal", "hybrid-t1-w2", "hybrid-w1-t2")


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid of angular frequencies about a carrier.

    Parameters
    ----------
    center : float
        Carrier angular frequency in rad/fs.
    step : float
        Sample spacing in rad/fs.
    count : int
        Number of samples; a power of two >= 8 so radix-2 transforms apply.
    """

    center: float
    step: float
    count: int

    def __post_init__(self) -> None:
        if not self.step > 0.0:
            raise ValueError(f"grid step must be positive, got {self.step}")
        if self.count < 8 or (self.count & (self.count - 1)) != 0:
            raise ValueError(
                f"grid count must be a power of two >= 8, got {self.count}"
            )

    def detunings(self) -> np.ndarray:
        """Sampled detunings (k - count/2)*step, rad/fs."""
        return (np.arange(self.count) - self.count // 2) * self.step

    def absolute(self) -> np.ndarray:
        """Absolute angular frequencies of the samples."""
        return self.center + self.detunings()

    @property
    def half_width(self) -> float:
        """Largest |detuning| on the grid (the leftmost sample)."""
        return (self.count // 2) * self.step


@dataclass(frozen=True)
class SourceConfig:
    """Photon-pair source parameters.

    Wavelengths and bandwidths are in nm (bandwidths are intensity FWHM);
    phase coefficients are in fs^2. ``pump_chirp`` and
    ``intrinsic_crystal_phase`` add up to the cross-phase coefficient of
    ``dw1*dw2``; the local chirps multiply ``dw1**2`` and ``dw2**2``.
    """

    center_wavelength1: float = 830.0
    center_wavelength2: float = 830.0
    fwhm_bandwidth1: float = 2.5
    fwhm_bandwidth2: float = 7.5
    pump_chirp: float = 0.0
    local_chirp1: float = 0.0
    local_chirp2: float = 0.0
    intrinsic_crystal_phase: float = 0.0

    def __post_init__(self) -> None:
        for name in ("center_wavelength1", "center_wavelength2"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        for name in ("fwhm_bandwidth1", "fwhm_bandwidth2"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")

    @property
    def cross_phase(self) -> float:
        """Total dw1*dw2 coefficient, fs^2."""
        return self.pump_chirp + self.intrinsic_crystal_phase

    def sigma1(self) -> float:
        """Intensity standard deviation of marginal 1, rad/fs."""
        return fwhm_to_sigma(
            bandwidth_to_angular(self.fwhm_bandwidth1, self.center_wavelength1)
        )

    def sigma2(self) -> float:
        return fwhm_to_sigma(
            bandwidth_to_angular(self.fwhm_bandwidth2, self.center_wavelength2)
        )


@dataclass(frozen=True, eq=False)
class BiphotonState:
    """Sampled joint spectral amplitude on a pair of frequency grids.

    ``amplitude[j, k]`` is the complex amplitude at detuning
    ``grid1.detunings()[j]`` of photon 1 and ``grid2.detunings()[k]`` of
    photon 2, normalized so that sum(|amplitude|^2)*step1*step2 == 1.
    """

    grid1: FrequencyGrid
    grid2: FrequencyGrid
    amplitude: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        shape = (self.grid1.count, self.grid2.count)
        if self.amplitude.shape != shape:
            raise ValueError(
                f"amplitude shape {self.amplitude.shape} != grid shape {shape}"
            )
        norm = self.total_intensity()
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(
                f"state not normalized: total intensity {norm!r} != 1 within 1e-9"
            )

    @property
    def cell_area(self) -> float:
        return self.grid1.step * self.grid2.step

    def total_intensity(self) -> float:
        return float(np.sum(np.abs(self.amplitude) ** 2) * self.cell_area)

    def jsi(self) -> np.ndarray:
        """Joint spectral intensity |amplitude|^2."""
        return np.abs(self.amplitude) ** 2

    def marginal(self, axis: int) -> np.ndarray:
        """Intensity marginal along ``axis`` (integrated over the other)."""
        other = 1 - axis
        other_step = (self.grid2 if axis == 0 else self.grid1).step
        return self.jsi().sum(axis=other) * other_step

    def swapped(self) -> "BiphotonState":
        """The same state with the two photons' axes exchanged."""
        return BiphotonState(self.grid2, self.grid1, self.amplitude.T.copy())


@dataclass(frozen=True, eq=False)
class SchmidtSpectrum:
    """Mode decomposition of a joint amplitude.

    ``values`` are non-negative, sorted descending, with sum of squares
    equal to the state's total intensity (1 for a normalized state).
    ``modes1[:, i]`` and ``modes2[:, i]`` are the paired mode functions,
    orthonormal under the grid inner product ``sum(a*conj(b))*step``.
    """

    values: np.ndarray
    modes1: np.ndarray = field(repr=False)
    modes2: np.ndarray = field(repr=False)
    grid1: FrequencyGrid
    grid2: FrequencyGrid

    def reconstruct(self) -> np.ndarray:
        """Amplitude matrix rebuilt from the mode expansion."""
        return (self.modes1 * self.values) @ self.modes2.T


@dataclass(frozen=True, eq=False)
class TimeFrequencyView:
    """A joint amplitude with one or both axes transformed to time.

    ``kind`` is one of ``joint-temporal`` (both axes in fs),
    ``hybrid-t1-w2`` (axis 0 in fs, axis 1 in rad/fs) and ``hybrid-w1-t2``
    (the converse). ``axes`` hold the uniform coordinate arrays.
    """

    kind: str
    axes: tuple[np.ndarray, np.ndarray]
    amplitude: np.ndarray = field(repr=False)

    def total_intensity(self) -> float:
        d0 = float(self.axes[0][1] - self.axes[0][0])
        d1 = float(self.axes[1][1] - self.axes[1][0])
        return float(np.sum(np.abs(self.amplitude) ** 2) * d0 * d1)


def marginal_envelope(detunings: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian amplitude envelope with intensity standard deviation sigma.

    This is the single place the marginal spectral shape is defined; the
    intensity |envelope|^2 has standard deviation ``sigma`` and FWHM
    ``2*sqrt(2*ln 2)*sigma``.
    """
    return np.exp(-(detunings**2) / (4.0 * sigma**2))


def default_grids(
    cfg: SourceConfig, count: int = 256, span_sigmas: float = 16.0
) -> tuple[FrequencyGrid, FrequencyGrid]:
    """Frequency grids sized to the source bandwidths.

    Each grid spans ``span_sigmas`` intensity standard deviations in total
    (+-8 sigma by default), putting the edge amplitude near exp(-16) ~
    1.1e-7, safely under the 1e-6 edge-decay floor that build_state
    enforces.
    """
    g1 = FrequencyGrid(
        omega_from_wavelength(cfg.center_wavelength1),
        span_sigmas * cfg.sigma1() / count,
        count,
    )
    g2 = FrequencyGrid(
        omega_from_wavelength(cfg.center_wavelength2),
        span_sigmas * cfg.sigma2() / count,
        count,
    )
    return g1, g2


def _phase_surface(
    cfg: SourceConfig, d1: np.ndarray, d2: np.ndarray
) -> np.ndarray:
    return (
        cfg.local_chirp1 * d1[:, None] ** 2
        + cfg.local_chirp2 * d2[None, :] ** 2
        + cfg.cross_phase * d1[:, None] * d2[None, :]
    )


def build_state(
    cfg: SourceConfig,
    grid1: FrequencyGrid | None = None,
    grid2: FrequencyGrid | None = None,
) -> BiphotonState:
    """Sample the source's joint spectral amplitude on the given grids.

    The amplitude is a product of Gaussian marginal envelopes (intensity
    FWHM matching the configured bandwidths) times
    ``exp(i*(local_chirp1*dw1^2 + local_chirp2*dw2^2 + cross*dw1*dw2))``
    with ``cross = pump_chirp + intrinsic_crystal_phase``, normalized to
    unit total intensity.

    Raises
    ------
    GridTooNarrowError
        If a marginal envelope exceeds 1e-6 of its peak at a grid edge.
    PhaseAliasingError
        If the sampled phase advances by more than pi between adjacent
        samples anywhere on the grid (the phase would alias).
    """
    if grid1 is None or grid2 is None:
        dg1, dg2 = default_grids(cfg)
        grid1 = grid1 if grid1 is not None else dg1
        grid2 = grid2 if grid2 is not None else dg2

    sigma1, sigma2 = cfg.sigma1(), cfg.sigma2()
    for label, grid, sigma in (("1", grid1, sigma1), ("2", grid2, sigma2)):
        edge = math.exp(-(grid.half_width**2) / (4.0 * sigma**2))
        if edge > EDGE_DECAY_FLOOR:
            raise GridTooNarrowError(
                f"grid {label} edge amplitude {edge:.3e} exceeds the "
                f"{EDGE_DECAY_FLOOR:g} decay floor; widen the grid span"
            )

    d1 = grid1.detunings()
    d2 = grid2.detunings()
    phase = _phase_surface(cfg, d1, d2)
    # Sampling criterion: the (unwrapped polynomial) phase must move by
    # less than pi per sample, or fringes alias on this grid.
    for axis, label in ((0, "1"), (1, "2")):
        step_max = float(np.max(np.abs(np.diff(phase, axis=axis)), initial=0.0))
        if step_max >= math.pi:
            raise PhaseAliasingError(
                f"phase advances {step_max:.3f} rad per sample along axis "
                f"{label} (>= pi); refine the grid step"
            )

    amp = (
        marginal_envelope(d1, sigma1)[:, None]
        * marginal_envelope(d2, sigma2)[None, :]
        * np.exp(1j * phase)
    )
    amp /= math.sqrt(np.sum(np.abs(amp) ** 2) * grid1.step * grid2.step)
    return BiphotonState(grid1, grid2, amp)


def modulus_only(state: BiphotonState) -> BiphotonState:
    """The state with its phase discarded (|amplitude| on the same grids).

    Taking the modulus preserves the L2 norm, so the result is a valid
    normalized state; it is what an intensity-only measurement can see.
    """
    return BiphotonState(
        state.grid1, state.grid2, np.abs(state.amplitude).astype(complex)
    )


def schmidt_decompose(state: BiphotonState) -> SchmidtSpectrum:
    """Decompose the amplitude into orthonormal mode pairs.

    Singular value decomposition of the sampled matrix; singular values
    are rescaled by sqrt(step1*step2) so that sum(values^2) equals the
    state's total intensity, and mode columns by 1/sqrt(step) so they are
    orthonormal under the grid inner product.
    """
    try:
        u, s, vh = np.linalg.svd(state.amplitude, full_matrices=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - BLAS dependent
        raise DecompositionFailedError(f"SVD did not converge: {exc}") from exc
    scale = math.sqrt(state.cell_area)
    return SchmidtSpectrum(
        values=s * scale,
        modes1=u / math.sqrt(state.grid1.step),
        modes2=vh.T / math.sqrt(state.grid2.step),
        grid1=state.grid1,
        grid2=state.grid2,
    )


def effective_schmidt_rank(spectrum: "SchmidtSpectrum | np.ndarray") -> float:
    """Effective number of occupied mode pairs, (sum v^2)^2 / sum v^4.

    Values below 1e-12 of the leading one are treated as exact zeros;
    the result is 1 for a single occupied mode and the mode count for
    equally occupied modes.
    """
    values = np.asarray(getattr(spectrum, "values", spectrum), dtype=float)
    if values.size == 0 or not np.any(values > 0.0):
        raise ValueError("all-zero mode spectrum has no effective rank")
    values = values[values >= SCHMIDT_VALUE_FLOOR * values.max()]
    p2 = float(np.sum(values**2))
    p4 = float(np.sum(values**4))
    return p2 * p2 / p4


def conjugate_time_axis(grid: FrequencyGrid) -> np.ndarray:
    """Centered time axis conjugate to ``grid`` (fs), spacing 2*pi/(N*step)."""
    dt = 2.0 * math.pi / (grid.count * grid.step)
    return (np.arange(grid.count) - grid.count // 2) * dt


def _unitary_time_transform(values: np.ndarray, axis: int, step: float) -> np.ndarray:
    """Unitary centered DFT with kernel exp(-i*detuning*t) along ``axis``.

    Maps samples on detunings (k - N/2)*step to samples on times
    (m - N/2)*2*pi/(N*step); exactly preserves sum(|.|^2)*spacing.
    """
    g = np.fft.ifftshift(values, axes=axis)
    g = np.fft.fft(g, axis=axis)
    g = np.fft.fftshift(g, axes=axis)
    return g * (step / math.sqrt(2.0 * math.pi))


def to_time_frequency(state: BiphotonState, kind: str) -> TimeFrequencyView:
    """Transform one or both frequency axes of a state to the time domain.

    ``kind`` selects the view: ``joint-temporal`` transforms both axes,
    ``hybrid-t1-w2`` only axis 0, ``hybrid-w1-t2`` only axis 1. Frequency
    axes remain detunings about the carriers; time axes are conjugate to
    those detunings. The transform is unitary, so the view's total
    intensity equals the state's.
    """
    if kind not in VIEW_KINDS:
        raise ValueError(f"unknown view kind {kind!r}; expected one of {VIEW_KINDS}")
    amp = state.amplitude
    ax0: np.ndarray = state.grid1.detunings()
    ax1: np.ndarray = state.grid2.detunings()
    if kind in ("joint-temporal", "hybrid-t1-w2"):
        amp = _unitary_time_transform(amp, 0, state.grid1.step)
        ax0 = conjugate_time_axis(state.grid1)
    if kind in ("joint-temporal", "hybrid-w1-t2"):
        amp = _unitary_time_transform(amp, 1, state.grid2.step)
        ax1 = conjugate_time_axis(state.grid2)
    return TimeFrequencyView(kind=kind, axes=(ax0, ax1), amplitude=amp)
