"""Unit conventions and conversions.

Angular frequencies are rad/fs, times are fs, spectral phase coefficients
are fs^n, wavelengths are nm. These keep every quantity in the pipeline
between O(1e-4) and O(1e5) and match the fs^2 scale on which chirp is
usually quoted.
"""
from __future__ import annotations

import math

__all__ = [
    "C_NM_PER_FS",
    "TWO_PI_C",
    "FWHM_OVER_SIGMA",
    "omega_from_wavelength",
    "wavelength_from_omega",
    "bandwidth_to_angular",
    "fwhm_to_sigma",
    "sigma_to_fwhm",
]

C_NM_PER_FS = 299.792458
TWO_PI_C = 2.0 * math.pi * C_NM_PER_FS

# intensity FWHM = FWHM_OVER_SIGMA * (intensity standard deviation)
FWHM_OVER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


def omega_from_wavelength(wavelength_nm: float) -> float:
    """Angular frequency (rad/fs) of a vacuum wavelength (nm)."""
    return TWO_PI_C / wavelength_nm


def wavelength_from_omega(omega: float) -> float:
    """Vacuum wavelength (nm) of an angular frequency (rad/fs)."""
    return TWO_PI_C / omega


def bandwidth_to_angular(bandwidth_nm: float, center_wavelength_nm: float) -> float:
    """Convert a wavelength width (nm) to an angular width (rad/fs).

    First-order dispersion of omega = 2 pi c / lambda at the center
    wavelength; adequate because every bandwidth here is far below the
    carrier frequency.
    """
    return TWO_PI_C / center_wavelength_nm**2 * bandwidth_nm


def fwhm_to_sigma(fwhm: float) -> float:
    """Standard deviation of a Gaussian intensity profile from its FWHM."""
    return fwhm / FWHM_OVER_SIGMA


def sigma_to_fwhm(sigma: float) -> float:
    return sigma * FWHM_OVER_SIGMA
