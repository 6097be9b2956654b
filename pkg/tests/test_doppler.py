"""Tests for the Doppler MUSIC estimator."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csiratio.doppler import (DopplerConfig, DopplerEstimator, default_doppler_grid, doppler_bases, doppler_basis_b1,
                              doppler_basis_b2, lattice_points, music_doppler, resolve_orders, select_reference,
                              stack_dcsir)
from csiratio.exceptions import InvalidConfigError, RankDeficiencyError, ZeroBasisError
from csiratio.signal_model import Path, PathSet, ScenarioSpec, SystemConfig, generate_offsets, random_paths, synthesize_csi

GRID_STEP = 1.0


def strong_static(doppler=100.0, static_gain=50.0):
    return PathSet((Path(np.exp(0.3j), doppler, 0.1e-6, 0.5),),
                   (Path(static_gain + 0j, 0.0, 0.05e-6, -0.2), Path(1j, 0.0, 0.2e-6, 0.7)))


class TestBases:
    def test_zero_frequency_vanishes(self):
        with pytest.raises(ZeroBasisError):
            doppler_basis_b1(0.0, 8, 1e-3)
        with pytest.raises(ZeroBasisError):
            doppler_basis_b2(0.0, 0.0, 8, 1e-3)

    def test_aliased_frequency_vanishes(self):
        with pytest.raises(ZeroBasisError):
            doppler_basis_b1(1000.0, 8, 1e-3)

    @pytest.mark.parametrize("f", [-250.0, 3.0, 120.5])
    def test_single_lag_unit_magnitude(self, f):
        b = doppler_basis_b1(f, 1, 1e-3)
        assert b.shape == (1,)
        assert abs(b[0]) == pytest.approx(1.0)

    def test_first_order_direct(self):
        b = doppler_basis_b1(100.0, 4, 1e-3)
        raw = np.exp(0.2j * np.pi * np.arange(1, 5)) - 1
        assert np.linalg.norm(b) == pytest.approx(1.0)
        np.testing.assert_allclose(b, raw / np.linalg.norm(raw), rtol=1e-14)

    def test_second_order_direct(self):
        b = doppler_basis_b2(100.0, 100.0, 4, 1e-3)
        raw = (np.exp(0.2j * np.pi * np.arange(1, 5)) - 1) ** 2
        np.testing.assert_allclose(b, raw / np.linalg.norm(raw), rtol=1e-14)

    def test_second_order_commutes(self):
        np.testing.assert_allclose(doppler_basis_b2(40.0, -130.0, 30, 1e-3), doppler_basis_b2(-130.0, 40.0, 30, 1e-3))

    def test_vectorized(self):
        B = doppler_basis_b1(np.array([10.0, 20.0, 30.0]), 30, 1e-3)
        assert B.shape == (30, 3)
        np.testing.assert_allclose(B[:, 1], doppler_basis_b1(20.0, 30, 1e-3))

    def test_orders_per_candidate(self):
        cfg = DopplerConfig(taylor_orders=3)
        assert len(doppler_bases(cfg.grid, cfg)) == 3


class TestGridAndConfig:
    def test_default_grid_excludes_zero(self):
        grid = default_doppler_grid()
        assert not np.any(grid == 0)
        assert np.all(np.diff(grid) > 0)
        assert grid[0] <= -300 and grid[-1] >= 300
        assert np.min(np.abs(grid)) == pytest.approx(GRID_STEP)
        np.testing.assert_allclose(np.diff(grid)[np.abs(grid[:-1]) > 1], GRID_STEP)

    @pytest.mark.parametrize("kw", [{"grid": [-1.0, 0.0, 1.0]}, {"grid": [3.0, 2.0, 1.0]}, {"grid": [1.0, 2.0]},
                                    {"window": 0}, {"selection": "best"}, {"packet_interval": 0.0}])
    def test_invalid(self, kw):
        with pytest.raises(InvalidConfigError):
            DopplerConfig(**kw)

    def test_auto_orders(self):
        # J grows with the rank so that 2J exceeds r / L
        assert resolve_orders("auto", 2, 1) == 2
        assert resolve_orders("auto", 9, 1) == 5
        assert 2 * resolve_orders("auto", 9, 2) > 9 / 2
        assert resolve_orders(3, 9, 1) == 3

    def test_lattice_points(self):
        pts = sorted(lattice_points([10.0, 25.0], 2))
        assert pts == [10.0, 20.0, 25.0, 35.0, 50.0]


class TestStack:
    def test_static_only_is_zero(self, config):
        paths = random_paths(ScenarioSpec(n_dynamic=0), np.random.default_rng(0))
        st_ = stack_dcsir(synthesize_csi(config, paths), DopplerConfig.from_system(config))
        np.testing.assert_allclose(st_.matrix, 0, atol=1e-13)

    def test_single_column_boundary(self):
        cfg = SystemConfig(packet_count=31, taylor_window=30)
        Y = synthesize_csi(cfg, strong_static())
        assert stack_dcsir(Y, DopplerConfig.from_system(cfg)).matrix.shape == (30, 1)

    def test_columns_hold_lags(self, config, single_path):
        Y = synthesize_csi(config, single_path)
        st_ = stack_dcsir(Y, DopplerConfig.from_system(config, n=2, q=1, g=5))
        y = Y.samples
        xi = y[:, 5, 2] / y[:, 5, 1]
        np.testing.assert_allclose(st_.matrix[:, 7], xi[8:38] - xi[7], rtol=1e-13)
        assert st_.matrix.shape == (30, 98)

    def test_rank_two_when_static_dominates(self, config):
        Y = synthesize_csi(config, strong_static())
        cfg = DopplerConfig.from_system(config)
        s = np.linalg.svd(stack_dcsir(Y, cfg).matrix, compute_uv=False)
        assert np.count_nonzero(s >= cfg.rank_tolerance * s[0]) == 2

    def test_rank_counts_harmonics(self, config):
        # the ratio is a geometric series in e^{j2π m T_A f}; harmonic k scales as r^(k-1)
        for gain, expected_max in [(50.0, 2), (10.0, 4), (3.0, 8)]:
            Y = synthesize_csi(config, strong_static(static_gain=gain))
            s = np.linalg.svd(stack_dcsir(Y, DopplerConfig.from_system(config)).matrix, compute_uv=False)
            assert 2 <= np.count_nonzero(s >= 1e-3 * s[0]) <= expected_max

    def test_reference_prefers_strong_denominator(self, config, single_path):
        Y = synthesize_csi(config, single_path)
        n, q, g = select_reference(Y, config.taylor_window)
        strength = np.min(np.abs(Y.samples), axis=0)
        assert strength[g, n - q] == strength.max()
        assert q != 0


class TestMusicDoppler:
    def test_single_path_round_trip(self, config, single_path, random_offsets):
        Y = synthesize_csi(config, single_path, random_offsets)
        est = DopplerEstimator(1).fit(Y)
        assert abs(est.doppler_[0] - 100.0) <= GRID_STEP
        assert est.spectrum_.grid_name == "f_hz"

    def test_two_paths_round_trip(self, config, two_paths, random_offsets):
        Y = synthesize_csi(config, two_paths, random_offsets)
        est = DopplerEstimator(2).fit(Y)
        np.testing.assert_allclose(np.sort(est.doppler_), [-150.0, 200.0], atol=2 * GRID_STEP)
        spec = est.spectrum_
        near_zero = max(spec.value_at(-1.0), spec.value_at(1.0))
        assert near_zero < 0.1 * min(spec.value_at(-150.0), spec.value_at(200.0))

    def test_offset_invariance(self, config, two_paths):
        a = DopplerEstimator(2).fit(synthesize_csi(config, two_paths, generate_offsets("iid-uniform", 128, seed=1)))
        b = DopplerEstimator(2).fit(synthesize_csi(config, two_paths, generate_offsets("random-walk", 128, seed=2)))
        np.testing.assert_allclose(a.doppler_, b.doppler_, atol=1e-6)

    def test_sorted_by_height_and_deterministic(self, config, two_paths):
        Y = synthesize_csi(config, two_paths)
        a = DopplerEstimator(2).fit(Y)
        b = DopplerEstimator(2).fit(Y)
        assert np.all(np.diff(a.peak_heights_) <= 0)
        np.testing.assert_array_equal(a.doppler_, b.doppler_)

    def test_peaks_selection_in_dominant_static_regime(self, config):
        Y = synthesize_csi(config, strong_static(doppler=-73.0))
        est = DopplerEstimator(1, selection="peaks").fit(Y)
        assert abs(est.doppler_[0] + 73.0) <= GRID_STEP

    def test_full_rank_stack_raises(self, config, single_path):
        Y = synthesize_csi(config, single_path)
        with pytest.raises(RankDeficiencyError):
            DopplerEstimator(1, signal_rank=30).fit(Y)

    def test_bare_array_needs_timing(self, config, single_path):
        y = synthesize_csi(config, single_path).samples
        with pytest.raises(InvalidConfigError):
            DopplerEstimator(1).fit(y)
        est = DopplerEstimator(1, packet_interval=1e-3, window=30).fit(y)
        assert abs(est.predict()[0] - 100.0) <= GRID_STEP

    def test_noise_aware(self, single_path):
        cfg = SystemConfig(snr_db=20.0)
        Y = synthesize_csi(cfg, single_path, noise_seed=3)
        est = DopplerEstimator(1, noise_aware=True).fit(Y)
        assert abs(est.doppler_[0] - 100.0) <= 3 * GRID_STEP

    def test_music_doppler_function(self, config, single_path):
        Y = synthesize_csi(config, single_path)
        cfg = DopplerConfig.from_system(config, n=1, q=1, g=0)
        res = music_doppler(stack_dcsir(Y, cfg), cfg, 1)
        assert abs(res.frequencies[0] - 100.0) <= GRID_STEP
        assert res.spectrum.values.shape == cfg.grid.shape


class TestProperties:
    @settings(max_examples=15, deadline=None)
    @given(f=st.floats(-295.0, -10.0) | st.floats(10.0, 295.0), seed=st.integers(0, 2**32 - 1))
    def test_single_path_recovery_with_offsets(self, f, seed):
        cfg = SystemConfig()
        rng = np.random.default_rng(seed)
        statics = random_paths(ScenarioSpec(n_static=5), rng).static_
        paths = PathSet((Path(np.exp(2j * np.pi * rng.uniform()), f, rng.uniform(0, 0.4e-6),
                              rng.uniform(-1.5, 1.5)),), statics)
        Y = synthesize_csi(cfg, paths, generate_offsets("iid-uniform", cfg.packet_count, seed=rng))
        assert abs(DopplerEstimator(1).fit(Y).doppler_[0] - f) <= GRID_STEP

    @settings(max_examples=20, deadline=None)
    @given(f=st.floats(-300.0, 300.0).filter(lambda v: abs(v) > 0.5), P=st.integers(1, 40))
    def test_basis_unit_norm(self, f, P):
        assert np.linalg.norm(doppler_basis_b1(f, P, 1e-3)) == pytest.approx(1.0)
