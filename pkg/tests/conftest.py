"""Shared fixtures: reference sources, grids, and states.

The chirped reference (cross-phase -1.6e5 fs^2 on auto-sized 256-point
grids) anchors the frozen Schmidt-spectrum values in test_model; the
model-resolution pair (1024 x 2048 at 0.025 nm) is the geometry the
simulation and reconstruction tests share.
"""
import numpy as np
import pytest

from biphoton.interferometer import ShearSettings
from biphoton.model import (
    FrequencyGrid,
    SourceConfig,
    BiphotonState,
    build_state,
    default_grids,
)
from biphoton.units import bandwidth_to_angular, omega_from_wavelength

CHIRP = -1.6e5


@pytest.fixture(scope="session")
def chirped_source() -> SourceConfig:
    return SourceConfig(pump_chirp=CHIRP)


@pytest.fixture(scope="session")
def chirped_state(chirped_source) -> BiphotonState:
    return build_state(chirped_source, *default_grids(chirped_source, count=256))


@pytest.fixture(scope="session")
def model_grids() -> tuple[FrequencyGrid, FrequencyGrid]:
    center = omega_from_wavelength(830.0)
    step = bandwidth_to_angular(0.025, 830.0)
    return (
        FrequencyGrid(center=center, step=step, count=1024),
        FrequencyGrid(center=center, step=step, count=2048),
    )


@pytest.fixture(scope="session")
def model_state(chirped_source, model_grids) -> BiphotonState:
    return build_state(chirped_source, *model_grids)


@pytest.fixture(scope="session")
def shear_pair(model_grids) -> tuple[ShearSettings, ShearSettings]:
    shear = 4 * model_grids[0].step
    return (
        ShearSettings(shear=shear, delay=5000.0, sheared_photon="signal"),
        ShearSettings(shear=shear, delay=5000.0, sheared_photon="idler"),
    )
