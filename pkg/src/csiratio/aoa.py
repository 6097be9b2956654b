"""AoA estimation from the spatial D-CSIR manifold.

For one packet pair ``(m, m + p)`` and subcarrier ``g`` the manifold is the
``N x N`` matrix ``A[n, n'] = ψ_{n, n-n'}[m, p, g]``.  Its column-major
vectorization is linear in the per-path basis vectors ``d1(φ_l)`` (and,
to second order, ``d2(φ_l, φ_l)``), so a MUSIC search over ``φ`` with those
vectors recovers the dynamic spatial frequencies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_count, check_csi, denominator_floor
from .exceptions import DegenerateDenominatorError, InvalidConfigError, RankDeficiencyError, ZeroBasisError
from .numerics import find_peaks, noise_floor_rank, null_space
from .spectrum import SpectrumTrace, music_cost, music_spectrum

ZERO_BASIS_ATOL = 1e-9
GUARD_CV_THRESHOLD = 1e-3
# the single-path manifold has exact rank N, so a loose cut drops signal directions
AOA_REL_TOL = 1e-6
PHASE_CONVENTIONS = ("derived", "printed")


def default_phi_grid(points: int = 1801) -> np.ndarray:
    """``φ = π sin θ`` for ``points`` angles uniform over ``θ ∈ [-90°, 90°]``.

    The endpoints map to ``±π``; ``-π`` is dropped since it aliases ``π``.
    """
    theta = np.linspace(-np.pi / 2, np.pi / 2, points)
    phi = np.pi * np.sin(theta)
    return phi[1:]


def phi_to_theta(phi, spacing_over_wavelength: float = 0.5) -> np.ndarray:
    """Inverse of the spatial-frequency map, clipped to the visible region."""
    s = np.asarray(phi, dtype=float) / (2 * np.pi * spacing_over_wavelength)
    return np.arcsin(np.clip(s, -1.0, 1.0))


def _samples(Y, m: int, g: int, rel_floor: float) -> np.ndarray:
    y = check_csi(Y)
    M, G, N = y.shape
    if not 0 <= m < M or not 0 <= g < G:
        raise IndexError(f"(m, g)=({m}, {g}) outside the tensor")
    v = y[m, g]
    if np.any(np.abs(v) < denominator_floor(y, rel_floor)):
        raise DegenerateDenominatorError(f"antenna sample below floor at m={m}, g={g}")
    return v


def build_manifold(Y, m: int, p: int, g: int, *, rel_floor: float = 1e-12) -> np.ndarray:
    """``N x N`` matrix with entry ``(n, n')`` equal to ``ψ_{n, n-n'}[m, p, g]``."""
    y = check_csi(Y)
    M = y.shape[0]
    if m < 0 or p < 0 or m + p > M - 1:
        raise IndexError(f"packet index m + p must lie in [0, {M - 1}]")
    a = _samples(y, m, g, rel_floor)
    b = _samples(y, m + p, g, rel_floor)
    A = b[:, None] / b[None, :] - a[:, None] / a[None, :]
    np.fill_diagonal(A, 0.0)
    return A


def vec(A: np.ndarray) -> np.ndarray:
    """Column-major vectorization: block ``n'`` holds column ``n'``."""
    return np.asarray(A).reshape(-1, order="F")


@dataclass
class SpatialManifold:
    """Stacked manifold ``Ā`` of shape ``(N^2, P)``; column ``p-1`` is ``vec(A[m, p, g])``."""

    matrix: np.ndarray
    m: int
    g: int

    @property
    def antenna_count(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))


def stack_manifold(Y, window: int, m: int = 0, g: int = 0, *, rel_floor: float = 1e-12) -> SpatialManifold:
    check_count("window", window)
    cols = [vec(build_manifold(Y, m, p, g, rel_floor=rel_floor)) for p in range(1, window + 1)]
    return SpatialManifold(np.stack(cols, axis=1), m, g)


def _d1_raw(v: np.ndarray, phi: np.ndarray) -> np.ndarray:
    # entry (n, n') = h_{n, n-n'}(φ) e^{jnφ} = (e^{jnφ} y_{n'} - e^{jn'φ} y_n) / y_{n'}^2
    N = v.size
    e = np.exp(1j * np.arange(N)[None, :] * phi[:, None])  # (K, N)
    num = e[:, :, None] * v[None, None, :] - e[:, None, :] * v[None, :, None]
    out = num / v[None, None, :] ** 2  # (K, n, n')
    return out.transpose(0, 2, 1).reshape(phi.size, N * N).T


def _d2_raw(v: np.ndarray, phi: np.ndarray, phi2: np.ndarray, convention: str) -> np.ndarray:
    # H_{n, n-n'}(φ, φ') times the per-row phase e^{jn(φ+φ')} (derived) or e^{j2n(φ+φ')} (printed)
    if convention not in PHASE_CONVENTIONS:
        raise InvalidConfigError(f"phase convention must be one of {PHASE_CONVENTIONS}")
    N = v.size
    n = np.arange(N)
    q = n[:, None] - n[None, :]  # (n, n')
    a, b = phi[:, None, None], phi2[:, None, None]
    yn = v[None, :, None]
    yd = v[None, None, :]
    H = (2 * np.exp(-1j * q * (a + b)) * yn / yd ** 3
         - (np.exp(-1j * q * a) + np.exp(-1j * q * b)) / yd ** 2)
    scale = 1 if convention == "derived" else 2
    H = H * np.exp(1j * scale * n[None, :, None] * (a + b))
    H[:, n, n] = 0.0
    return H.transpose(0, 2, 1).reshape(phi.size, N * N).T


def _normalize_columns(v: np.ndarray, strict: bool, what: str):
    norm = np.linalg.norm(v, axis=0)
    bad = norm <= np.sqrt(v.shape[0]) * ZERO_BASIS_ATOL * max(1.0, float(np.max(norm, initial=0.0)))
    if strict and np.any(bad):
        raise ZeroBasisError(f"{what} basis vanishes")
    out = np.zeros_like(v)
    out[:, ~bad] = v[:, ~bad] / norm[~bad]
    return out, bad


def aoa_basis_d1(phi, Y, m: int = 0, g: int = 0, *, rel_floor: float = 1e-12) -> np.ndarray:
    """Unit-norm first-order spatial basis, length ``N^2`` (``(N^2, K)`` for an array ``phi``)."""
    v = _samples(Y, m, g, rel_floor)
    raw = _d1_raw(v, np.atleast_1d(np.asarray(phi, dtype=float)))
    out, _ = _normalize_columns(raw, True, "first-order spatial")
    return out[:, 0] if np.ndim(phi) == 0 else out


def aoa_basis_d2(phi, phi2, Y, m: int = 0, g: int = 0, *, convention: str = "derived",
                 rel_floor: float = 1e-12) -> np.ndarray:
    """Unit-norm second-order spatial basis.

    ``convention="derived"`` multiplies row ``n`` by ``e^{jn(φ+φ')}``, which
    makes ``d2(φ_l, φ_l)`` an exact image of the second-order Taylor term;
    ``"printed"`` uses ``e^{j2n(φ+φ')}`` instead.
    """
    v = _samples(Y, m, g, rel_floor)
    a = np.atleast_1d(np.asarray(phi, dtype=float))
    b = np.atleast_1d(np.asarray(phi2, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    out, _ = _normalize_columns(_d2_raw(v, a, b, convention), True, "second-order spatial")
    return out[:, 0] if np.ndim(phi) == 0 and np.ndim(phi2) == 0 else out


@dataclass(frozen=True)
class GuardResult:
    """Outcome of the trivial-solution check."""

    fired: bool
    dispersion: float
    recommendation: str = ""

    def __bool__(self):
        return self.fired


def trivial_solution_guard(Y, n_paths: int, n_antennas: Optional[int] = None, *,
                           threshold: float = GUARD_CV_THRESHOLD, g: int = 0) -> GuardResult:
    """Flag the single-path regime where ``φ = 0`` is a spurious AoA solution.

    With one dynamic path and identical static components on every antenna,
    ``d1(0)`` and ``d2(0, 0)`` lie in the manifold's column space.  Exact
    equality is not observable, so the test uses the coefficient of
    variation across antennas of ``mean_m |y_n[m, g]|``.  The magnitude
    removes the timing and frequency offsets, and averaging over packets
    smears the dynamic term equally on every antenna.
    """
    y = check_csi(Y)
    N = y.shape[2] if n_antennas is None else n_antennas
    if n_paths != 1 or N < 2:
        return GuardResult(False, float("nan"))
    level = np.mean(np.abs(y[:, g, :N]), axis=0)
    mean = float(np.mean(level))
    cv = float(np.std(level) / mean) if mean > 0 else 0.0
    if cv < threshold:
        return GuardResult(True, cv, "static components look identical across antennas; "
                                     "use the joint single-path AoA and delay estimator")
    return GuardResult(False, cv)


@dataclass
class AoaResult:
    phis: np.ndarray
    heights: np.ndarray
    spectrum: SpectrumTrace
    numerical_rank: int
    singular_values: np.ndarray
    trusted: bool = True
    guard: Optional[GuardResult] = None


def music_aoa(manifold: SpatialManifold, Y, n_paths: int, grid=None, *, orders: int = 2,
              convention: str = "derived", rank_tolerance: float = AOA_REL_TOL,
              signal_rank: Optional[int] = None, noise_aware: bool = False,
              spacing_over_wavelength: float = 0.5, guard_threshold: float = GUARD_CV_THRESHOLD,
              rel_floor: float = 1e-12) -> AoaResult:
    """Return the ``n_paths`` highest spatial-frequency peaks, strongest first.

    Candidates whose basis vanishes (e.g. ``φ = 0`` on antenna-symmetric
    channels) receive the largest possible cost instead of aborting the
    whole search.
    """
    check_count("n_paths", n_paths)
    if orders not in (1, 2):
        raise InvalidConfigError("orders must be 1 or 2")
    A = manifold.matrix
    N = manifold.antenna_count
    if N * (N - 1) < n_paths:
        raise InvalidConfigError(f"{N} antennas resolve at most {N * (N - 1)} paths")
    grid = default_phi_grid() if grid is None else np.asarray(grid, dtype=float)
    s = np.linalg.svd(A, compute_uv=False)
    if signal_rank is not None:
        rank = int(signal_rank)
    elif noise_aware:
        rank = noise_floor_rank(s, *A.shape, rel_tol=rank_tolerance)
    else:
        rank = None
    ns = null_space(A, rank_tolerance, rank=rank)
    if ns.basis.shape[1] == 0:
        raise RankDeficiencyError(f"spatial manifold has full numerical rank {ns.numerical_rank}")
    v = _samples(Y, manifold.m, manifold.g, rel_floor)
    bases, bad = [], np.zeros(grid.size, dtype=bool)
    raws = [_d1_raw(v, grid)]
    if orders == 2:
        raws.append(_d2_raw(v, grid, grid, convention))
    for raw in raws:
        b, flag = _normalize_columns(raw, False, "spatial")
        bases.append(b)
        bad |= flag
    cost = music_cost(bases, ns.basis)
    cost[bad] = float(len(bases))
    values = music_spectrum(cost)
    theta = np.degrees(phi_to_theta(grid, spacing_over_wavelength))
    trace = SpectrumTrace(grid.copy(), values, "phi_rad", {"theta_deg": theta}, cost=cost)
    peaks = find_peaks(values, grid, n_paths, refine_on=cost)
    guard = trivial_solution_guard(Y, n_paths, N, threshold=guard_threshold, g=manifold.g)
    return AoaResult(np.array([p[0] for p in peaks]), np.array([p[1] for p in peaks]), trace,
                     ns.numerical_rank, ns.singular_values, trusted=not guard.fired, guard=guard)


class AoaEstimator(BaseEstimator):
    """Estimate dynamic-path spatial frequencies (and AoAs) from a CSI tensor.

    Parameters
    ----------
    n_paths : int
        Number of dynamic paths ``L``.
    window : int, optional
        Packet lags ``p = 1..P`` stacked into the manifold; taken from the
        tensor's config when omitted.
    m, g : int
        Packet and subcarrier at which the manifold is built.
    grid : array-like, optional
        Candidate spatial frequencies; defaults to :func:`default_phi_grid`.
    convention : {"derived", "printed"}
        Per-row phase of the second-order basis.
    """

    def __init__(self, n_paths=1, *, window=None, m=0, g=0, grid=None, orders=2, convention="derived",
                 rank_tolerance=AOA_REL_TOL, signal_rank=None, noise_aware=False,
                 spacing_over_wavelength=0.5, guard_threshold=GUARD_CV_THRESHOLD):
        self.n_paths = n_paths
        self.window = window
        self.m = m
        self.g = g
        self.grid = grid
        self.orders = orders
        self.convention = convention
        self.rank_tolerance = rank_tolerance
        self.signal_rank = signal_rank
        self.noise_aware = noise_aware
        self.spacing_over_wavelength = spacing_over_wavelength
        self.guard_threshold = guard_threshold

    def fit(self, Y, y=None):
        check_count("n_paths", self.n_paths)
        config = getattr(Y, "config", None)
        P = self.window or (config.taylor_window if config else None)
        if P is None:
            raise InvalidConfigError("window is required for bare arrays")
        spacing = self.spacing_over_wavelength
        if config is not None and self.spacing_over_wavelength == 0.5 and config.antenna_spacing is not None:
            spacing = config.antenna_spacing / config.wavelength
        self.manifold_ = stack_manifold(Y, P, self.m, self.g)
        result = music_aoa(self.manifold_, Y, self.n_paths, self.grid, orders=self.orders,
                           convention=self.convention, rank_tolerance=self.rank_tolerance,
                           signal_rank=self.signal_rank, noise_aware=self.noise_aware,
                           spacing_over_wavelength=spacing, guard_threshold=self.guard_threshold)
        self.phi_ = result.phis
        self.theta_ = phi_to_theta(result.phis, spacing)
        self.peak_heights_ = result.heights
        self.spectrum_ = result.spectrum
        self.numerical_rank_ = result.numerical_rank
        self.trusted_ = result.trusted
        self.guard_ = result.guard
        return self

    def predict(self, Y=None):
        """Spatial frequencies in radians; refits when ``Y`` is given."""
        if Y is not None:
            return self.fit(Y).phi_
        check_is_fitted(self, "phi_")
        return self.phi_
