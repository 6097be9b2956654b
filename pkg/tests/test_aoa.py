"""Tests for the spatial manifold, AoA bases, MUSIC search and trivial-solution guard."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csiratio.aoa import (AoaEstimator, aoa_basis_d1, aoa_basis_d2, build_manifold, default_phi_grid, music_aoa,
                          phi_to_theta, stack_manifold, trivial_solution_guard, vec)
from csiratio.exceptions import InvalidConfigError
from csiratio.ratio import taylor_deriv_1, taylor_deriv_2
from csiratio.signal_model import (Path, PathSet, ScenarioSpec, SystemConfig, generate_offsets, random_paths,
                                   spatial_frequency, synthesize_csi)

from .helpers import equal_static_paths, phase_error


def grid_step_at(grid, phi):
    i = int(np.argmin(np.abs(grid - phi)))
    return max(grid[min(i + 1, grid.size - 1)] - grid[i], grid[i] - grid[max(i - 1, 0)])


def matrix_rank(A, rel_tol=1e-6):
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.count_nonzero(s >= rel_tol * s[0]))


class TestManifold:
    def test_static_only_is_zero(self, config):
        paths = random_paths(ScenarioSpec(n_dynamic=0), np.random.default_rng(0))
        A = build_manifold(synthesize_csi(config, paths), 0, 3, 0)
        np.testing.assert_allclose(A, 0, atol=1e-13)

    def test_diagonal_exactly_zero(self, config, two_paths):
        A = build_manifold(synthesize_csi(config, two_paths), 4, 7, 9)
        assert np.all(np.diag(A) == 0)

    def test_two_antennas_direct(self):
        cfg = SystemConfig(antenna_count=2)
        paths = PathSet((Path(1.0, 80.0, 0.1e-6, 0.4),), (Path(1.5j, 0.0, 0.3e-6, -0.5),))
        y = synthesize_csi(cfg, paths, generate_offsets("iid-uniform", 128, seed=0)).samples
        A = build_manifold(y, 2, 5, 3)
        assert A[1, 0] == pytest.approx(y[7, 3, 1] / y[7, 3, 0] - y[2, 3, 1] / y[2, 3, 0], rel=1e-14)
        assert A[0, 1] == pytest.approx(y[7, 3, 0] / y[7, 3, 1] - y[2, 3, 0] / y[2, 3, 1], rel=1e-14)

    def test_stacked_columns(self, config, single_path):
        Y = synthesize_csi(config, single_path)
        man = stack_manifold(Y, 30)
        assert man.matrix.shape == (64, 30)
        assert man.antenna_count == 8
        np.testing.assert_array_equal(man.matrix[:, 4], vec(build_manifold(Y, 0, 5, 0)))

    def test_vec_is_column_major(self):
        A = np.arange(4).reshape(2, 2)
        np.testing.assert_array_equal(vec(A), [0, 2, 1, 3])


class TestBases:
    def test_single_antenna_rejected(self):
        with pytest.raises(InvalidConfigError):
            aoa_basis_d1(0.3, np.ones((4, 2, 1), dtype=complex))

    def test_first_order_direct(self, config, two_paths):
        Y = synthesize_csi(config, two_paths)
        N, phi = 8, 0.7
        raw = np.zeros((N, N), dtype=complex)
        for n in range(N):
            for k in range(N):
                if n != k:
                    raw[n, k] = taylor_deriv_1(Y, n, n - k, 0, 0, phi) * np.exp(1j * n * phi)
        expected = vec(raw) / np.linalg.norm(raw)
        d1 = aoa_basis_d1(phi, Y)
        np.testing.assert_allclose(d1, expected, rtol=1e-12, atol=1e-15)
        assert np.all(np.diag(d1.reshape(N, N, order="F")) == 0)

    def test_second_order_direct(self, config, two_paths):
        Y = synthesize_csi(config, two_paths)
        N, phi = 8, 0.3
        raw = np.zeros((N, N), dtype=complex)
        for n in range(N):
            for k in range(N):
                if n != k:
                    raw[n, k] = taylor_deriv_2(Y, n, n - k, 0, 0, phi, phi) * np.exp(2j * n * phi)
        d2 = aoa_basis_d2(phi, phi, Y)
        np.testing.assert_allclose(d2, vec(raw) / np.linalg.norm(raw), rtol=1e-12, atol=1e-15)
        assert np.all(np.diag(d2.reshape(N, N, order="F")) == 0)

    def test_second_order_symmetry(self, config, two_paths):
        Y = synthesize_csi(config, two_paths)
        np.testing.assert_allclose(aoa_basis_d2(0.4, -1.2, Y), aoa_basis_d2(-1.2, 0.4, Y), rtol=1e-13)

    def test_printed_convention_differs(self, config, two_paths):
        Y = synthesize_csi(config, two_paths)
        a = aoa_basis_d2(0.4, 0.4, Y, convention="derived")
        b = aoa_basis_d2(0.4, 0.4, Y, convention="printed")
        assert np.linalg.norm(a - b) > 1e-3
        with pytest.raises(InvalidConfigError):
            aoa_basis_d2(0.4, 0.4, Y, convention="other")

    def test_manifold_in_span_of_true_bases(self, config):
        # strongly convergent single path: the Taylor model explains vec(A) to second order
        paths = PathSet((Path(np.exp(0.2j), 90.0, 0.1e-6, 0.6),), (Path(8.0 + 0j, 0.0, 0.05e-6, -0.4),))
        Y = synthesize_csi(config, paths, generate_offsets("iid-uniform", 128, seed=4))
        phi = paths.dynamic[0].spatial_freq(config)
        Q, _ = np.linalg.qr(np.column_stack([aoa_basis_d1(phi, Y), aoa_basis_d2(phi, phi, Y)]))
        for p in (1, 5, 30):
            v = vec(build_manifold(Y, 0, p, 0))
            assert np.linalg.norm(v - Q @ (Q.conj().T @ v)) <= 0.05 * np.linalg.norm(v)


class TestMusicAoa:
    def test_single_path(self, config, single_path, random_offsets):
        Y = synthesize_csi(config, single_path, random_offsets)
        est = AoaEstimator(1).fit(Y)
        truth = spatial_frequency(np.radians(30), config.antenna_spacing, config.wavelength)
        grid = default_phi_grid()
        assert abs(est.phi_[0] - truth) <= grid_step_at(grid, truth)
        assert np.degrees(est.theta_[0]) == pytest.approx(30.0, abs=0.1)
        assert est.trusted_

    def test_two_paths(self, config, two_paths, random_offsets):
        Y = synthesize_csi(config, two_paths, random_offsets)
        est = AoaEstimator(2).fit(Y)
        grid = default_phi_grid()
        for theta in (-40, 25):
            truth = np.pi * np.sin(np.radians(theta))
            assert np.min(np.abs(est.phi_ - truth)) <= 2 * grid_step_at(grid, truth)

    def test_offset_invariance(self, config, two_paths):
        a = AoaEstimator(2).fit(synthesize_csi(config, two_paths, generate_offsets("iid-uniform", 128, seed=8)))
        b = AoaEstimator(2).fit(synthesize_csi(config, two_paths, generate_offsets("random-walk", 128, seed=9)))
        np.testing.assert_allclose(a.phi_, b.phi_, atol=1e-6)

    def test_trivial_solution_with_equal_static(self):
        # eight antennas: the spurious φ = 0 wins over the true φ ≈ 0.93
        cfg = SystemConfig()
        paths = equal_static_paths()
        Y = synthesize_csi(cfg, paths, generate_offsets("iid-uniform", 128, seed=3))
        est = AoaEstimator(1).fit(Y)
        assert abs(est.phi_[0]) <= grid_step_at(default_phi_grid(), 0.0)
        assert not est.trusted_ and est.guard_.fired

    def test_equal_static_two_antennas(self):
        cfg = SystemConfig(antenna_count=2)
        Y = synthesize_csi(cfg, equal_static_paths(), generate_offsets("iid-uniform", 128, seed=3))
        res = music_aoa(stack_manifold(Y, 30), Y, 1)
        zero = int(np.argmin(np.abs(res.spectrum.grid)))
        assert res.spectrum.cost[zero] <= 1e-12
        assert res.guard.fired and not res.trusted

    def test_spectrum_trace_metadata(self, config, single_path):
        est = AoaEstimator(1).fit(synthesize_csi(config, single_path))
        tr = est.spectrum_
        assert tr.grid_name == "phi_rad"
        np.testing.assert_allclose(tr.columns["theta_deg"], np.degrees(phi_to_theta(tr.grid)))

    def test_too_many_paths(self):
        cfg = SystemConfig(antenna_count=2)
        Y = synthesize_csi(cfg, equal_static_paths())
        with pytest.raises(InvalidConfigError):
            music_aoa(stack_manifold(Y, 30), Y, 3)

    def test_default_grid(self):
        grid = default_phi_grid()
        assert grid.size == 1800
        assert grid[-1] == pytest.approx(np.pi)
        assert grid[0] > -np.pi


class TestGuard:
    def test_two_paths_never_fire(self):
        cfg = SystemConfig()
        paths = PathSet((Path(1.0, 50.0, 0.1e-6, 0.2), Path(1.0, -80.0, 0.2e-6, -0.4)),
                        (Path(2.0, 0.0, 0.0, 0.0),))
        assert not trivial_solution_guard(synthesize_csi(cfg, paths), 2)

    def test_equal_static_fires(self):
        cfg = SystemConfig()
        res = trivial_solution_guard(synthesize_csi(cfg, equal_static_paths(), generate_offsets("iid-uniform", 128,
                                                                                               seed=1)), 1)
        assert res.fired and res.dispersion < 1e-3
        assert "joint" in res.recommendation

    def test_random_channels_rarely_fire(self):
        cfg = SystemConfig()
        rng = np.random.default_rng(17)
        fired = 0
        for _ in range(100):
            paths = random_paths(ScenarioSpec(n_dynamic=1, n_static=5), rng)
            Y = synthesize_csi(cfg, paths, generate_offsets("iid-uniform", 128, seed=rng))
            fired += trivial_solution_guard(Y, 1).fired
        assert fired / 100 < 0.05

    @pytest.mark.parametrize("N", [2, 3, 4, 8])
    def test_rank_identity(self, N):
        cfg = SystemConfig(antenna_count=N)
        Y = synthesize_csi(cfg, equal_static_paths(), generate_offsets("iid-uniform", 128, seed=3))
        A = stack_manifold(Y, 30).matrix
        aug = np.column_stack([A, aoa_basis_d1(0.0, Y), aoa_basis_d2(0.0, 0.0, Y)])
        assert matrix_rank(aug) == matrix_rank(A)

    @pytest.mark.parametrize("N", [3, 4, 8])
    def test_rank_identity_fails_without_equal_static(self, N):
        cfg = SystemConfig(antenna_count=N)
        paths = PathSet(equal_static_paths().dynamic, (Path(2.0, 0.0, 0.05e-6, 0.4),))
        A = stack_manifold(synthesize_csi(cfg, paths), 30).matrix
        Y = synthesize_csi(cfg, paths)
        aug = np.column_stack([A, aoa_basis_d1(0.0, Y), aoa_basis_d2(0.0, 0.0, Y)])
        assert matrix_rank(aug) > matrix_rank(A)


class TestProperties:
    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), m=st.integers(0, 90), p=st.integers(0, 30), g=st.integers(0, 63))
    def test_diagonal_zero(self, seed, m, p, g):
        cfg = SystemConfig()
        paths = random_paths(ScenarioSpec(n_dynamic=2, n_static=3), np.random.default_rng(seed))
        A = build_manifold(synthesize_csi(cfg, paths), m, p, g)
        assert np.all(np.diag(A) == 0)

    @settings(max_examples=10, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_single_path_offset_invariance(self, seed):
        cfg = SystemConfig()
        rng = np.random.default_rng(seed)
        paths = random_paths(ScenarioSpec(n_dynamic=1, n_static=5), rng)
        a = AoaEstimator(1).fit(synthesize_csi(cfg, paths)).phi_
        b = AoaEstimator(1).fit(synthesize_csi(cfg, paths, generate_offsets("iid-uniform", 128, seed=rng))).phi_
        assert phase_error(a, b)[0] <= 1e-6
