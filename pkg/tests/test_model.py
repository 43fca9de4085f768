"""State construction, Schmidt structure, and time-frequency views.

The numerical anchors here were frozen from two independent routes: the
closed-form effective mode count of a Gaussian model with pure cross
phase, K = sqrt(1 + 4*phi11^2*sigma1^2*sigma2^2) (with the geometric mode
spectrum ratio r = sqrt((K-1)/(K+1))), and dense SVD runs on the default
auto-sized grids. Both agree to nine digits, so regressions against the
frozen values catch convention drift (FWHM vs sigma, amplitude vs
intensity, grid centering) at the 1e-7 level.
"""
import math

import numpy as np
import pytest

from biphoton.errors import (
    DecompositionFailedError,
    GridTooNarrowError,
    PhaseAliasingError,
)
from biphoton.model import (
    VIEW_KINDS,
    BiphotonState,
    FrequencyGrid,
    SourceConfig,
    build_state,
    conjugate_time_axis,
    default_grids,
    effective_schmidt_rank,
    modulus_only,
    schmidt_decompose,
    to_time_frequency,
)
from biphoton.units import (
    FWHM_OVER_SIGMA,
    bandwidth_to_angular,
    fwhm_to_sigma,
    omega_from_wavelength,
)

CHIRP = -1.6e5

# Dense-SVD Schmidt values of the chirped reference on the default
# 256-point auto grids, frozen after cross-checking against the analytic
# geometric spectrum lambda_i ~ r^i.
FROZEN_SCHMIDT = np.array([
    4.674957743e-01, 4.132640700e-01, 3.653234980e-01, 3.229442574e-01,
    2.854812077e-01, 2.523640476e-01, 2.230886334e-01, 1.972093048e-01,
    1.743320997e-01, 1.541087579e-01, 1.362314186e-01, 1.204279345e-01,
    1.064577288e-01, 9.410813259e-02, 8.319114746e-02, 7.354058386e-02,
    6.500953093e-02, 5.746812019e-02, 5.080154850e-02, 4.490833041e-02,
])
FROZEN_K = 8.151127715

# Mode counts over a cross-phase sweep on 512-point grids (512 needed so
# the steepest phase stays below the aliasing limit).
FROZEN_K_SWEEP = {
    0.0: 1.000000,
    2.0e4: 1.422151,
    5.0e4: 2.718586,
    1.0e5: 5.153915,
    1.6e5: 8.151128,
    3.0e5: 15.200842,
}


def analytic_mode_count(cross_phase: float, cfg: SourceConfig) -> float:
    s1, s2 = cfg.sigma1(), cfg.sigma2()
    return math.sqrt(1.0 + 4.0 * cross_phase**2 * s1**2 * s2**2)


class TestFrequencyGrid:
    def test_detunings_centered_on_half_count(self):
        grid = FrequencyGrid(center=2.0, step=0.25, count=16)
        expected = (np.arange(16) - 8) * 0.25
        np.testing.assert_array_equal(grid.detunings(), expected)
        np.testing.assert_allclose(grid.absolute(), 2.0 + expected)

    def test_count_must_be_power_of_two_at_least_eight(self):
        with pytest.raises(ValueError):
            FrequencyGrid(center=1.0, step=0.1, count=12)
        with pytest.raises(ValueError):
            FrequencyGrid(center=1.0, step=0.1, count=4)

    def test_step_must_be_positive(self):
        with pytest.raises(ValueError):
            FrequencyGrid(center=1.0, step=0.0, count=16)


class TestSourceConfig:
    def test_defaults_match_reference_source(self):
        cfg = SourceConfig()
        assert cfg.center_wavelength1 == 830.0
        assert cfg.fwhm_bandwidth1 == 2.5
        assert cfg.fwhm_bandwidth2 == 7.5
        assert cfg.pump_chirp == 0.0

    def test_cross_phase_sums_pump_and_crystal_contributions(self):
        cfg = SourceConfig(pump_chirp=-1.0e5, intrinsic_crystal_phase=3.5e3)
        assert cfg.cross_phase == -1.0e5 + 3.5e3

    def test_sigma_follows_intensity_fwhm_convention(self):
        cfg = SourceConfig()
        expected = fwhm_to_sigma(bandwidth_to_angular(2.5, 830.0))
        assert cfg.sigma1() == pytest.approx(expected, rel=1e-12)
        assert bandwidth_to_angular(2.5, 830.0) / expected == pytest.approx(
            FWHM_OVER_SIGMA
        )

    def test_non_positive_bandwidth_rejected(self):
        with pytest.raises(ValueError):
            SourceConfig(fwhm_bandwidth1=0.0)
        with pytest.raises(ValueError):
            SourceConfig(fwhm_bandwidth2=-2.0)


class TestBuildState:
    def test_unit_norm(self, chirped_state):
        total = (
            np.sum(np.abs(chirped_state.amplitude) ** 2)
            * chirped_state.grid1.step
            * chirped_state.grid2.step
        )
        assert abs(total - 1.0) < 1e-9

    def test_narrow_grid_rejected(self):
        cfg = SourceConfig()
        narrow = FrequencyGrid(
            omega_from_wavelength(830.0), cfg.sigma1() / 16.0, 16
        )
        wide = default_grids(cfg)[1]
        with pytest.raises(GridTooNarrowError):
            build_state(cfg, narrow, wide)

    def test_steep_phase_rejected(self):
        cfg = SourceConfig(pump_chirp=3.0e5)
        with pytest.raises(PhaseAliasingError):
            build_state(cfg, *default_grids(cfg, count=256))

    def test_separable_source_is_single_mode(self):
        cfg = SourceConfig()
        spectrum = schmidt_decompose(build_state(cfg, *default_grids(cfg)))
        assert spectrum.values[1:].max() < 1e-6 * spectrum.values[0]
        assert effective_schmidt_rank(spectrum) == pytest.approx(1.0, abs=1e-9)

    def test_modulus_only_strips_entanglement(self, chirped_state):
        k = effective_schmidt_rank(schmidt_decompose(modulus_only(chirped_state)))
        assert k == pytest.approx(1.0, abs=1e-3)


class TestSchmidtSpectrum:
    def test_frozen_values_of_chirped_reference(self, chirped_state):
        spectrum = schmidt_decompose(chirped_state)
        np.testing.assert_allclose(spectrum.values[:20], FROZEN_SCHMIDT, rtol=1e-7)

    def test_frozen_mode_count_and_analytic_formula(self, chirped_state, chirped_source):
        k = effective_schmidt_rank(schmidt_decompose(chirped_state))
        assert k == pytest.approx(FROZEN_K, rel=1e-8)
        assert k == pytest.approx(analytic_mode_count(CHIRP, chirped_source), rel=1e-7)

    def test_geometric_ratio_matches_analytic_mode_count(self, chirped_state):
        values = schmidt_decompose(chirped_state).values
        k = analytic_mode_count(CHIRP, SourceConfig())
        r = math.sqrt((k - 1.0) / (k + 1.0))
        np.testing.assert_allclose(values[1:20] / values[:19], r, rtol=1e-6)

    def test_reconstruction_roundtrip(self, chirped_state):
        spectrum = schmidt_decompose(chirped_state)
        rebuilt = spectrum.reconstruct()
        err = np.linalg.norm(rebuilt - chirped_state.amplitude)
        assert err / np.linalg.norm(chirped_state.amplitude) < 1e-10

    def test_modes_orthonormal(self, chirped_state):
        spectrum = schmidt_decompose(chirped_state)
        for modes, grid in (
            (spectrum.modes1, chirped_state.grid1),
            (spectrum.modes2, chirped_state.grid2),
        ):
            gram = modes.conj().T @ modes * grid.step
            np.testing.assert_allclose(gram, np.eye(gram.shape[0]), atol=1e-9)

    def test_mode_count_monotone_in_cross_phase(self):
        measured = []
        for chirp, frozen in FROZEN_K_SWEEP.items():
            cfg = SourceConfig(pump_chirp=chirp)
            state = build_state(cfg, *default_grids(cfg, count=512))
            k = effective_schmidt_rank(schmidt_decompose(state))
            assert k == pytest.approx(frozen, abs=5e-6)
            measured.append(k)
        assert all(b > a for a, b in zip(measured, measured[1:]))

    def test_equal_values_give_exact_count(self):
        assert effective_schmidt_rank(np.full(7, 0.31)) == pytest.approx(7.0, rel=1e-12)

    def test_tiny_values_floored_out(self):
        values = np.array([1.0, 1.0, 1e-13])
        assert effective_schmidt_rank(values) == pytest.approx(2.0, rel=1e-12)

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            effective_schmidt_rank(np.zeros(4))


class TestPhaseInvariance:
    def test_global_phase_leaves_spectrum_unchanged(self, chirped_state):
        ref = schmidt_decompose(chirped_state).values
        rotated = BiphotonState(
            chirped_state.grid1,
            chirped_state.grid2,
            chirped_state.amplitude * np.exp(0.7j),
        )
        np.testing.assert_allclose(
            schmidt_decompose(rotated).values, ref, rtol=1e-12, atol=1e-12
        )

    def test_separable_phase_leaves_spectrum_unchanged(self, chirped_state):
        ref = schmidt_decompose(chirped_state).values
        d1 = chirped_state.grid1.detunings()
        d2 = chirped_state.grid2.detunings()
        phase = np.exp(
            1j * (3.0e4 * d1**2 + 40.0 * d1)[:, None]
            + 1j * (-2.0e4 * d2**2 + 17.0 * d2)[None, :]
        )
        twisted = BiphotonState(
            chirped_state.grid1, chirped_state.grid2, chirped_state.amplitude * phase
        )
        np.testing.assert_allclose(
            schmidt_decompose(twisted).values, ref, rtol=0, atol=1e-9
        )


class TestTimeFrequencyViews:
    @pytest.mark.parametrize("kind", VIEW_KINDS)
    def test_parseval(self, chirped_state, kind):
        view = to_time_frequency(chirped_state, kind)
        assert view.total_intensity() == pytest.approx(1.0, rel=1e-9)

    def test_unknown_kind_rejected(self, chirped_state):
        with pytest.raises(ValueError):
            to_time_frequency(chirped_state, "t1-vs-t2")

    def test_time_axis_spacing(self):
        grid = FrequencyGrid(center=1.0, step=0.01, count=64)
        t = conjugate_time_axis(grid)
        assert t[32] == 0.0
        assert t[1] - t[0] == pytest.approx(2 * math.pi / (64 * 0.01), rel=1e-12)

    def test_chirped_ridge_slope_recovers_cross_phase(self, chirped_state):
        view = to_time_frequency(chirped_state, "hybrid-t1-w2")
        intensity = np.abs(view.amplitude) ** 2
        t1, w2 = view.axes
        col_mass = intensity.sum(axis=0)
        keep = col_mass > 0.05 * col_mass.max()
        centroids = (t1[:, None] * intensity).sum(axis=0)[keep] / col_mass[keep]
        slope = np.polyfit(w2[keep], centroids, 1)[0]
        assert slope == pytest.approx(CHIRP, rel=0.02)

    @staticmethod
    def _temporal_correlation(cfg: SourceConfig, count: int) -> float:
        view = to_time_frequency(
            build_state(cfg, *default_grids(cfg, count=count)), "joint-temporal"
        )
        w = np.abs(view.amplitude) ** 2
        t1, t2 = view.axes
        w /= w.sum()
        m1 = (w.sum(axis=1) * t1).sum()
        m2 = (w.sum(axis=0) * t2).sum()
        cov = ((t1 - m1)[:, None] * (t2 - m2)[None, :] * w).sum()
        v1 = (w.sum(axis=1) * (t1 - m1) ** 2).sum()
        v2 = (w.sum(axis=0) * (t2 - m2) ** 2).sum()
        return float(cov / math.sqrt(v1 * v2))

    def test_joint_temporal_correlation_sign_fixed_under_chirp_sign(self):
        # A chirped pump chirps each daughter photon (quadratic local
        # phase chirp/2 on both) on top of the shared cross term. The
        # local chirps map each photon's frequency onto its arrival time,
        # which correlates the joint temporal intensity; the correlation
        # is even in the chirp, so flipping its sign changes nothing.
        def correlation(chirp):
            cfg = SourceConfig(
                pump_chirp=chirp, local_chirp1=chirp / 2, local_chirp2=chirp / 2
            )
            return self._temporal_correlation(cfg, count=512)

        plus, minus = correlation(1.2e5), correlation(-1.2e5)
        assert plus == pytest.approx(minus, abs=1e-9)
        assert plus > 0.5

    def test_pure_cross_phase_leaves_temporal_intensity_separable(self):
        # With no local chirp the time-domain cross term is purely
        # imaginary, so the temporal intensity factorizes exactly.
        corr = self._temporal_correlation(SourceConfig(pump_chirp=CHIRP), 256)
        assert abs(corr) < 1e-9

    def test_separable_state_has_uncorrelated_joint_temporal_view(self):
        cfg = SourceConfig()
        view = to_time_frequency(
            build_state(cfg, *default_grids(cfg)), "joint-temporal"
        )
        intensity = np.abs(view.amplitude) ** 2
        outer = np.outer(intensity.sum(axis=1), intensity.sum(axis=0)) / intensity.sum()
        np.testing.assert_allclose(intensity, outer, atol=1e-9 * intensity.max())
