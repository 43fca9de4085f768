"""Shearing-interferometer patterns, detector effects, and event sampling.

The fringe-free anchors here are exact: with zero shear and zero delay
the two arms are identical, so the coincidence pattern collapses to the
joint spectral intensity at zero fringe offset and to nothing at a
half-wave offset. Everything statistical is driven by fixed seeds.
"""
import math

import numpy as np
import pytest

from biphoton.errors import (
    DegenerateHistogramError,
    DelayTooSmallError,
    EmptyAcceptanceWindowError,
    ShearAlignmentError,
)
from biphoton.interferometer import (
    IDLER_IN_EOSI,
    SIGNAL_IN_EOSI,
    DetectorModel,
    DriftModel,
    EventStream,
    Interferogram,
    ShearSettings,
    detector_blur,
    detector_grids,
    expected_pattern,
    histogram,
    shear_step_count,
    simulate_events,
    validate_shear,
)
from biphoton.model import FrequencyGrid
from biphoton.units import (
    FWHM_OVER_SIGMA,
    bandwidth_to_angular,
    omega_from_wavelength,
)

DETECTOR = DetectorModel()
NO_DRIFT = DriftModel(kind="none")


@pytest.fixture(scope="module")
def reference_events(model_state, shear_pair):
    return simulate_events(
        model_state, shear_pair[0], DETECTOR, NO_DRIFT, duration=600.0, seed=11
    )


class TestShearSettings:
    def test_configuration_tags(self, shear_pair):
        assert shear_pair[0].configuration == SIGNAL_IN_EOSI
        assert shear_pair[1].configuration == IDLER_IN_EOSI

    def test_unknown_photon_rejected(self):
        with pytest.raises(ValueError):
            ShearSettings(shear=1e-4, delay=5000.0, sheared_photon="pump")

    def test_step_count_roundtrip(self, model_grids):
        grid = model_grids[0]
        for m in (1, 4, -4, 17):
            settings = ShearSettings(shear=m * grid.step, delay=5000.0)
            assert shear_step_count(settings, grid) == m

    def test_misaligned_shear_rejected(self, model_grids):
        grid = model_grids[0]
        settings = ShearSettings(shear=3.5 * grid.step, delay=5000.0)
        with pytest.raises(ShearAlignmentError):
            shear_step_count(settings, grid)

    def test_delay_rule(self, model_state, model_grids):
        shear = 4 * model_grids[0].step
        with pytest.raises(DelayTooSmallError):
            validate_shear(ShearSettings(shear=shear, delay=0.0), model_state)
        with pytest.raises(DelayTooSmallError):
            validate_shear(ShearSettings(shear=shear, delay=300.0), model_state)
        assert validate_shear(ShearSettings(shear=shear, delay=5000.0), model_state) == 4


class TestDetectorAndDriftValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"resolution_sheared": 0.0},
            {"resolution_herald": -0.1},
            {"efficiency": 0.0},
            {"efficiency": 1.2},
            {"coincidence_rate": 0.0},
            {"spectral_range": (835.0, 825.0)},
        ],
    )
    def test_detector_rejects(self, kwargs):
        with pytest.raises(ValueError):
            DetectorModel(**kwargs)

    def test_drift_rejects(self):
        with pytest.raises(ValueError):
            DriftModel(kind="sinusoidal")
        with pytest.raises(ValueError):
            DriftModel(diffusion=-1.0)


class TestExpectedPattern:
    def test_degenerate_arms_reproduce_jsi(self, chirped_state):
        settings = ShearSettings(shear=0.0, delay=0.0)
        pattern = expected_pattern(chirped_state, settings)
        np.testing.assert_allclose(pattern, chirped_state.jsi(), rtol=1e-12)

    def test_degenerate_arms_cancel_at_half_wave(self, chirped_state):
        settings = ShearSettings(shear=0.0, delay=0.0)
        pattern = expected_pattern(chirped_state, settings, fringe_phase_offset=math.pi)
        assert pattern.max() <= 1e-12 * chirped_state.jsi().max()

    @pytest.mark.parametrize("offset", [0.0, 1.0, math.pi, 4.5])
    def test_non_negative_at_any_fringe_phase(self, chirped_state, offset):
        shear = 4 * chirped_state.grid1.step
        settings = ShearSettings(shear=shear, delay=5000.0)
        assert expected_pattern(chirped_state, settings, offset).min() >= 0.0

    def test_opposite_offsets_average_to_fringe_free_part(self, chirped_state):
        # S(0) + S(pi) isolates the non-interfering part, which must be
        # the mean of the JSI and the JSI evaluated one shear ahead.
        shear = 4 * chirped_state.grid1.step
        settings = ShearSettings(shear=shear, delay=5000.0)
        total = expected_pattern(chirped_state, settings) + expected_pattern(
            chirped_state, settings, fringe_phase_offset=math.pi
        )
        jsi = chirped_state.jsi()
        jsi_ahead = np.zeros_like(jsi)
        jsi_ahead[:-4] = jsi[4:]
        np.testing.assert_allclose(total, 0.5 * (jsi + jsi_ahead), atol=1e-15 * jsi.max())

    def test_idler_configuration_matches_swapped_state(self, chirped_state):
        sig = ShearSettings(shear=4 * chirped_state.grid2.step, delay=5000.0)
        idl = ShearSettings(
            shear=4 * chirped_state.grid2.step, delay=5000.0, sheared_photon="idler"
        )
        np.testing.assert_array_equal(
            expected_pattern(chirped_state, idl),
            expected_pattern(chirped_state.swapped(), sig),
        )

    def test_fringes_modulate_along_sheared_axis(self, chirped_state):
        # At a 5 ps delay the fringe period is ~1.26e-3 rad/fs, about 7
        # model-grid samples, so the sheared-axis profile oscillates.
        shear = 4 * chirped_state.grid1.step
        pattern = expected_pattern(chirped_state, ShearSettings(shear, 5000.0))
        profile = pattern[:, chirped_state.grid2.count // 2]
        smooth = chirped_state.jsi()[:, chirped_state.grid2.count // 2]
        crossings = np.sum(np.abs(np.diff(np.sign(profile - 0.5 * smooth))) > 0)
        assert crossings > 20


class TestDetectorBlur:
    def test_mass_conserved(self, chirped_state):
        jsi = chirped_state.jsi()
        blurred = detector_blur(jsi, DETECTOR, chirped_state.grid1, chirped_state.grid2)
        assert blurred.sum() == pytest.approx(jsi.sum(), rel=1e-9)

    def test_impulse_spreads_to_stated_resolution(self):
        center = omega_from_wavelength(830.0)
        step = bandwidth_to_angular(0.025, 830.0)
        grid = FrequencyGrid(center=center, step=step, count=256)
        det = DetectorModel(resolution_sheared=0.5, resolution_herald=1.0)
        impulse = np.zeros((256, 256))
        impulse[128, 128] = 1.0
        blurred = detector_blur(impulse, det, grid, grid)
        cells = np.arange(256) - 128
        for axis, resolution in ((1, 0.5), (0, 1.0)):
            marg = blurred.sum(axis=axis)
            sigma = math.sqrt((marg * cells**2).sum() / marg.sum())
            expected = bandwidth_to_angular(resolution, 830.0) / FWHM_OVER_SIGMA / step
            assert sigma == pytest.approx(expected, rel=5e-3)

    def test_complex_input_blurred_componentwise(self, chirped_state):
        values = chirped_state.amplitude
        blurred = detector_blur(values, DETECTOR, chirped_state.grid1, chirped_state.grid2)
        np.testing.assert_allclose(
            blurred.real,
            detector_blur(values.real, DETECTOR, chirped_state.grid1, chirped_state.grid2),
        )
        assert np.iscomplexobj(blurred)


class TestDetectorGrids:
    def test_bin_widths_match_resolutions(self, model_state, shear_pair):
        sheared, herald = detector_grids(DETECTOR, model_state, shear_pair[0])
        model_step = model_state.grid1.step
        assert sheared.step == pytest.approx(2.0 * model_step, rel=1e-12)
        assert herald.step == pytest.approx(12.0 * model_step, rel=1e-12)

    def test_bins_cover_acceptance_window(self, model_state, shear_pair):
        span = omega_from_wavelength(825.0) - omega_from_wavelength(835.0)
        for grid in detector_grids(DETECTOR, model_state, shear_pair[0]):
            assert grid.count * grid.step >= span
        sheared, herald = detector_grids(DETECTOR, model_state, shear_pair[0])
        assert (sheared.count, herald.count) == (256, 64)

    def test_idler_configuration_swaps_roles(self, model_state, shear_pair):
        fine = DetectorModel(resolution_sheared=0.05, resolution_herald=0.3)
        sheared, herald = detector_grids(fine, model_state, shear_pair[1])
        # both arms share a carrier here, so only the widths distinguish them
        assert sheared.step < herald.step


class TestSimulateEvents:
    def test_deterministic_for_fixed_seed(self, model_state, shear_pair):
        kwargs = dict(duration=120.0, seed=5)
        a = simulate_events(model_state, shear_pair[0], DETECTOR, NO_DRIFT, **kwargs)
        b = simulate_events(model_state, shear_pair[0], DETECTOR, NO_DRIFT, **kwargs)
        assert a == b

    def test_seed_sequence_equivalent_to_int(self, model_state, shear_pair):
        a = simulate_events(
            model_state, shear_pair[0], DETECTOR, NO_DRIFT, duration=60.0, seed=5
        )
        b = simulate_events(
            model_state,
            shear_pair[0],
            DETECTOR,
            NO_DRIFT,
            duration=60.0,
            seed=np.random.SeedSequence(5),
        )
        assert a == b

    def test_seeds_differ(self, model_state, shear_pair):
        a = simulate_events(
            model_state, shear_pair[0], DETECTOR, NO_DRIFT, duration=60.0, seed=5
        )
        b = simulate_events(
            model_state, shear_pair[0], DETECTOR, NO_DRIFT, duration=60.0, seed=6
        )
        assert a != b

    def test_stream_geometry_and_rate(self, reference_events):
        ev = reference_events
        assert ev.configuration == SIGNAL_IN_EOSI
        assert ev.bin1.dtype == np.uint16 and ev.bin2.dtype == np.uint16
        assert np.all(np.diff(ev.timestamps) > 0.0)
        assert ev.timestamps[0] >= 0.0 and ev.timestamps[-1] <= 600.0
        # Poisson(15/s * 600 s): 9000 +- 95, leave 5 sigma of slack
        assert abs(len(ev) - 9000) < 475

    def test_events_follow_marginal_statistics(self, model_state, shear_pair, reference_events):
        from biphoton.interferometer import detected_pattern

        ev = reference_events
        density = detected_pattern(model_state, shear_pair[0], DETECTOR)
        w2 = model_state.grid2.absolute()
        marg = density.sum(axis=0)
        mean_true = (marg * w2).sum() / marg.sum()
        var_true = (marg * (w2 - mean_true) ** 2).sum() / marg.sum()
        sampled = ev.herald_grid.absolute()[ev.bin2]
        # detector bins quantize the herald axis; allow half a bin on the
        # mean and a few percent on the spread
        assert abs(sampled.mean() - mean_true) < 0.6 * ev.herald_grid.step
        assert math.sqrt(sampled.var()) == pytest.approx(
            math.sqrt(var_true), rel=0.05
        )

    def test_drift_none_equals_zero_diffusion(self, model_state, shear_pair):
        a = simulate_events(
            model_state, shear_pair[0], DETECTOR, DriftModel(kind="none"), 60.0, seed=3
        )
        b = simulate_events(
            model_state,
            shear_pair[0],
            DETECTOR,
            DriftModel(kind="random-walk", diffusion=0.0),
            60.0,
            seed=3,
        )
        assert a == b

    def test_drift_seed_controls_realization(self, model_state, shear_pair):
        strong = dict(kind="random-walk", diffusion=0.5)
        base = dict(duration=120.0, seed=3)
        a = simulate_events(
            model_state, shear_pair[0], DETECTOR, DriftModel(**strong, seed=1), **base
        )
        b = simulate_events(
            model_state, shear_pair[0], DETECTOR, DriftModel(**strong, seed=1), **base
        )
        c = simulate_events(
            model_state, shear_pair[0], DETECTOR, DriftModel(**strong, seed=2), **base
        )
        assert a == b
        assert a != c

    def test_empty_acceptance_window(self, model_state, shear_pair):
        det = DetectorModel(spectral_range=(400.0, 401.0))
        with pytest.raises(EmptyAcceptanceWindowError):
            simulate_events(model_state, shear_pair[0], det, NO_DRIFT, 60.0, seed=0)

    def test_non_positive_duration_rejected(self, model_state, shear_pair):
        with pytest.raises(ValueError):
            simulate_events(model_state, shear_pair[0], DETECTOR, NO_DRIFT, 0.0, seed=0)


def synthetic_stream(n: int) -> EventStream:
    grid = FrequencyGrid(center=2.27, step=1e-4, count=16)
    return EventStream(
        configuration=SIGNAL_IN_EOSI,
        settings=ShearSettings(shear=4e-4, delay=5000.0),
        sheared_grid=grid,
        herald_grid=grid,
        bin1=(np.arange(n) % 3 + 2).astype(np.uint16),
        bin2=(np.arange(n) % 5 + 7).astype(np.uint16),
        timestamps=np.arange(n) * 0.25 + 0.1,
    )


class TestEventStreamValidation:
    def test_length_mismatch(self):
        ev = synthetic_stream(10)
        with pytest.raises(ValueError):
            EventStream(
                ev.configuration,
                ev.settings,
                ev.sheared_grid,
                ev.herald_grid,
                ev.bin1[:5],
                ev.bin2,
                ev.timestamps,
            )

    def test_bin_out_of_range(self):
        ev = synthetic_stream(10)
        bad = ev.bin1.copy()
        bad[3] = 16
        with pytest.raises(ValueError):
            EventStream(
                ev.configuration,
                ev.settings,
                ev.sheared_grid,
                ev.herald_grid,
                bad,
                ev.bin2,
                ev.timestamps,
            )

    def test_non_increasing_timestamps(self):
        ev = synthetic_stream(10)
        bad = ev.timestamps.copy()
        bad[4] = bad[3]
        with pytest.raises(ValueError):
            EventStream(
                ev.configuration,
                ev.settings,
                ev.sheared_grid,
                ev.herald_grid,
                ev.bin1,
                ev.bin2,
                bad,
            )


class TestHistogram:
    def test_exact_counts_and_truncation(self):
        ev = synthetic_stream(250)
        grams = histogram(ev, subset_size=100)
        assert len(grams) == 2  # trailing 50 events dropped
        for k, gram in enumerate(grams):
            assert gram.total_events == 100
            assert gram.counts.sum() == 100
            sl = slice(k * 100, (k + 1) * 100)
            manual = np.zeros((16, 16), dtype=int)
            np.add.at(manual, (ev.bin1[sl], ev.bin2[sl]), 1)
            np.testing.assert_array_equal(gram.counts, manual)

    def test_subset_size_floor(self):
        with pytest.raises(ValueError):
            histogram(synthetic_stream(250), subset_size=50)

    def test_too_few_events(self):
        with pytest.raises(DegenerateHistogramError):
            histogram(synthetic_stream(99), subset_size=100)

    def test_interferogram_validation(self):
        grid = FrequencyGrid(center=2.27, step=1e-4, count=16)
        settings = ShearSettings(shear=4e-4, delay=5000.0)
        counts = np.ones((16, 16), dtype=int)
        with pytest.raises(ValueError):
            Interferogram(counts, settings, (grid, grid), total_events=100)
        with pytest.raises(ValueError):
            Interferogram(counts - 2, settings, (grid, grid), total_events=-256)
