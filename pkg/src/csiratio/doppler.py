"""Doppler estimation from stacked D-CSIR samples.

The D-CSIR over packet lag ``p`` is, after Taylor linearization, a sum of
the vectors ``(exp(j2π p T_A f) - 1)^k`` for each dynamic Doppler ``f``.
Those vectors never vanish for a nonzero ``f`` but are identically zero at
``f = 0``, so a MUSIC search over normalized versions of them sees no
static-path peak.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_count, check_csi, check_pair, denominator_floor
from .exceptions import DegenerateDenominatorError, InvalidConfigError, RankDeficiencyError, ZeroBasisError
from .numerics import DEFAULT_REL_TOL, find_peaks, noise_floor_rank, null_space
from .spectrum import SpectrumTrace, music_cost, music_spectrum

ZERO_BASIS_ATOL = 1e-9
SELECTIONS = ("auto", "peaks", "lattice")


def default_doppler_grid(limit: float = 300.0, step: float = 1.0, guard: float = 5.0) -> np.ndarray:
    """Uniform grid over ``[-limit - guard, limit + guard]`` Hz without 0 Hz.

    The guard band keeps a path at the edge of the Doppler range an
    interior local maximum.
    """
    span = limit + guard
    points = int(round(2 * span / step)) + 1
    grid = np.linspace(-span, span, points)
    return grid[np.abs(grid) > 1e-9 * span]


def _first_order(f, window: int, packet_interval: float) -> np.ndarray:
    p = np.arange(1, window + 1)[:, None]
    f = np.atleast_1d(np.asarray(f, dtype=float))[None, :]
    return np.exp(2j * np.pi * p * packet_interval * f) - 1


def _normalize(v: np.ndarray, what: str) -> np.ndarray:
    norm = np.linalg.norm(v, axis=0)
    scale = np.sqrt(v.shape[0]) * ZERO_BASIS_ATOL
    if np.any(norm <= scale):
        raise ZeroBasisError(f"{what} basis vanishes (trivial or aliased candidate)")
    return v / norm


def doppler_basis(f, window: int, packet_interval: float, order: int = 1) -> np.ndarray:
    """Normalized ``(exp(j2π p T_A f) - 1)^order`` for ``p = 1..P``.

    A scalar ``f`` gives a length-``P`` vector, an array gives a ``(P, K)``
    matrix with one column per candidate.
    """
    check_count("window", window)
    out = _normalize(_first_order(f, window, packet_interval) ** order, f"order-{order} Doppler")
    return out[:, 0] if np.ndim(f) == 0 else out


def doppler_basis_b1(f, window: int, packet_interval: float) -> np.ndarray:
    return doppler_basis(f, window, packet_interval, 1)


def doppler_basis_b2(f, f2, window: int, packet_interval: float) -> np.ndarray:
    """Normalized element-wise product of the two first-order vectors."""
    check_count("window", window)
    v = _first_order(f, window, packet_interval) * _first_order(f2, window, packet_interval)
    out = _normalize(v, "second-order Doppler")
    return out[:, 0] if np.ndim(f) == 0 and np.ndim(f2) == 0 else out


@dataclass
class DopplerConfig:
    """Doppler search settings.

    ``n``, ``q`` and ``g`` pick the ratio ``y_n / y_{n-q}`` on subcarrier
    ``g`` that is stacked.  ``signal_rank`` overrides the tolerance rule;
    ``noise_aware`` additionally lifts the threshold above an estimated
    noise floor.
    """

    packet_interval: float = 1e-3
    window: int = 30
    grid: np.ndarray = field(default_factory=default_doppler_grid)
    taylor_orders: int | str = 2
    rank_tolerance: float = DEFAULT_REL_TOL
    n: int = 1
    q: int = 1
    g: int = 0
    signal_rank: Optional[int] = None
    noise_aware: bool = False
    selection: str = "auto"
    pool_size: int = 16

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        if self.grid.ndim != 1 or self.grid.size < 3:
            raise InvalidConfigError("Doppler grid needs at least 3 points")
        if np.any(self.grid == 0):
            raise InvalidConfigError("Doppler grid must exclude 0 Hz")
        if np.any(np.diff(self.grid) <= 0):
            raise InvalidConfigError("Doppler grid must be strictly ascending")
        check_count("window", self.window)
        if self.taylor_orders != "auto":
            check_count("taylor_orders", self.taylor_orders)
        if not self.packet_interval > 0:
            raise InvalidConfigError("packet_interval must be positive")
        if self.selection not in SELECTIONS:
            raise InvalidConfigError(f"selection must be one of {SELECTIONS}")
        check_count("pool_size", self.pool_size)

    @classmethod
    def from_system(cls, config, **overrides) -> "DopplerConfig":
        base = dict(packet_interval=config.packet_interval, window=config.taylor_window)
        base.update(overrides)
        return cls(**base)


@dataclass
class StackedDcsir:
    """``P x (M - P)`` matrix whose column ``m`` is ``[ψ(m, 1), ..., ψ(m, P)]``."""

    matrix: np.ndarray
    n: int
    q: int
    g: int


def select_reference(Y, window: int = 1) -> tuple[int, int, int]:
    """Pick ``(n, q, g)`` with the largest worst-case denominator magnitude.

    The denominator antenna/subcarrier maximizes ``min_m |y_{n-q}[m, g]|``,
    which is the observable side of the Taylor convergence condition; the
    numerator antenna is the one whose ratio varies most over packets.
    """
    y = check_csi(Y, min_packets=window + 1)
    M, G, N = y.shape
    strength = np.min(np.abs(y), axis=0)  # (G, N)
    g, ref = np.unravel_index(int(np.argmax(strength)), strength.shape)
    ratios = y[:, g, :] / y[:, g, ref][:, None]
    spread = np.std(ratios, axis=0)
    spread[ref] = -np.inf
    n = int(np.argmax(spread))
    return n, n - int(ref), int(g)


def stack_dcsir(Y, cfg: DopplerConfig, *, rel_floor: float = 1e-12) -> StackedDcsir:
    """Stack D-CSIR vectors over ``m = 0..M-P-1`` for the configured pair."""
    y = check_csi(Y, min_packets=cfg.window + 1)
    M, G, N = y.shape
    check_pair(N, cfg.n, cfg.q)
    if not 0 <= cfg.g < G:
        raise IndexError(f"subcarrier g={cfg.g} outside [0, {G - 1}]")
    P = cfg.window
    if M <= P:
        raise InvalidConfigError(f"need M > P, got M={M}, P={P}")
    den = y[:, cfg.g, cfg.n - cfg.q]
    if np.any(np.abs(den) < denominator_floor(y, rel_floor)):
        raise DegenerateDenominatorError("reference antenna sample below floor")
    xi = y[:, cfg.g, cfg.n] / den
    m = np.arange(M - P)[None, :]
    p = np.arange(1, P + 1)[:, None]
    return StackedDcsir(xi[m + p] - xi[m], cfg.n, cfg.q, cfg.g)


@dataclass
class DopplerResult:
    frequencies: np.ndarray
    heights: np.ndarray
    spectrum: SpectrumTrace
    numerical_rank: int
    singular_values: np.ndarray
    taylor_orders: int


def resolve_orders(taylor_orders, rank: int, n_paths: int, floor: int = 2) -> int:
    """Number of Taylor orders ``J`` used per candidate.

    With ``"auto"`` the order grows with the numerical rank ``r`` of the
    stack: ``J = max(floor, r // (2 L) + 1)``.  A rank-``r`` stack of one
    path contains the first-order vectors of the harmonics ``2f, 3f, ...``
    too; ``2 J > r / L`` keeps the order-``J`` vector of ``2f`` outside the
    signal subspace so harmonics are not scored as paths.
    """
    if taylor_orders == "auto":
        return max(floor, rank // (2 * n_paths) + 1)
    return int(taylor_orders)


def doppler_bases(grid, cfg: DopplerConfig, orders: int | None = None) -> list[np.ndarray]:
    """Orders ``1..J`` of the harmonic-free basis on every grid candidate."""
    J = cfg.taylor_orders if orders is None else orders
    return [doppler_basis(grid, cfg.window, cfg.packet_interval, k) for k in range(1, J + 1)]


def _signal_rank(s, shape, cfg) -> int:
    if cfg.signal_rank is not None:
        return int(cfg.signal_rank)
    if cfg.noise_aware:
        return noise_floor_rank(s, *shape, rel_tol=cfg.rank_tolerance)
    smax = s[0] if s.size else 0.0
    return 0 if smax == 0 else int(np.count_nonzero(s >= cfg.rank_tolerance * smax))


def lattice_points(freqs, degree: int) -> np.ndarray:
    """All ``Σ a_l f_l`` with nonnegative integers ``1 <= Σ a_l <= degree``."""
    freqs = np.asarray(freqs, dtype=float)
    pts = [np.dot(c, freqs) for c in itertools.product(range(degree + 1), repeat=freqs.size)
           if 0 < sum(c) <= degree]
    return np.array(pts)


def lattice_score(freqs, signal_basis, weights, null_basis, cfg: DopplerConfig) -> float:
    """How badly the harmonic lattice of ``freqs`` explains the stack.

    The D-CSIR over ``p`` is a combination of ``e^{j2π p T_A ν} - 1`` with
    ``ν`` on the lattice generated by the dynamic Dopplers.  The score adds
    the singular-value-weighted signal energy left outside the lattice span
    (sums and harmonics miss a generator), averaged over lattice degrees
    ``1..D`` so that low-degree explanations win when aliasing modulo
    ``1/T_A`` makes two lattices coincide, to the first-order MUSIC cost of
    the candidates themselves (sub-harmonics are not in the signal space).
    """
    rank, window = signal_basis.shape[1], signal_basis.shape[0]
    degree = 1
    while len(lattice_points(freqs, degree + 1)) <= min(rank, window - 2):
        degree += 1
    W = signal_basis * weights[None, :]
    total = np.sum(weights ** 2)
    unexplained = 0.0
    for d in range(1, degree + 1):
        V = _first_order(lattice_points(freqs, d), window, cfg.packet_interval)
        norm = np.linalg.norm(V, axis=0)
        keep = norm > np.sqrt(window) * ZERO_BASIS_ATOL
        Q, _ = np.linalg.qr(V[:, keep] / norm[keep])
        unexplained += np.linalg.norm(W - Q @ (Q.conj().T @ W)) ** 2 / total
    unexplained /= degree
    try:
        own = doppler_basis(np.asarray(freqs, dtype=float), window, cfg.packet_interval, 1)
    except ZeroBasisError:
        return float("inf")  # a refined peak collapsed onto 0 Hz
    return float(unexplained + np.sum(np.abs(null_basis.conj().T @ own) ** 2))


def _local_maxima(values) -> int:
    v = np.asarray(values)
    return int(np.count_nonzero((v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])))


def select_lattice_generators(ns, cfg: DopplerConfig, n_paths: int) -> tuple[np.ndarray, np.ndarray]:
    """Pick the ``n_paths`` first-order peaks whose lattice best explains the stack.

    Returns the chosen frequencies and the first-order cost on the grid.
    """
    grid = cfg.grid
    cost1 = music_cost([doppler_basis(grid, cfg.window, cfg.packet_interval, 1)], ns.basis)
    values = music_spectrum(cost1)
    pool = [f for f, _ in find_peaks(values, grid, max(n_paths, min(cfg.pool_size, _local_maxima(values))),
                                     refine_on=cost1)]
    weights = ns.singular_values[: ns.numerical_rank]
    best = min(itertools.combinations(pool, n_paths),
               key=lambda F: lattice_score(F, ns.signal_basis, weights, ns.basis, cfg))
    return np.array(best), cost1


def music_doppler(stack: StackedDcsir, cfg: DopplerConfig, n_paths: int) -> DopplerResult:
    """Return the ``n_paths`` Doppler estimates (Hz), strongest first.

    Harmonics (and, with several paths, sums) of the true Dopplers also
    score as peaks whenever the static term does not dominate, so by default
    (``selection="auto"`` or ``"lattice"``) the estimates are the subset of
    first-order peaks selected by :func:`lattice_score`.  ``"peaks"`` returns
    the highest peaks of the multi-order spectrum instead.
    """
    check_count("n_paths", n_paths)
    A = stack.matrix
    s = np.linalg.svd(A, compute_uv=False)
    rank = _signal_rank(s, A.shape, cfg)
    ns = null_space(A, rank=rank)
    if ns.basis.shape[1] == 0:
        raise RankDeficiencyError(
            f"D-CSIR stack has full numerical rank {rank}; increase the window P or coarsen the tolerance"
        )
    use_lattice = cfg.selection in ("auto", "lattice")
    if use_lattice and ns.numerical_rank > 0:
        # the exported spectrum is the first-order one the selection reads
        orders = 1
        freqs, cost = select_lattice_generators(ns, cfg, n_paths)
        values = music_spectrum(cost)
        heights = np.interp(freqs, cfg.grid, values)
        order = np.argsort(-heights)
        freqs, heights = freqs[order], heights[order]
    else:
        orders = resolve_orders(cfg.taylor_orders, rank, n_paths)
        cost = music_cost(doppler_bases(cfg.grid, cfg, orders), ns.basis)
        values = music_spectrum(cost)
        peaks = find_peaks(values, cfg.grid, n_paths, refine_on=cost)
        freqs, heights = np.array([p[0] for p in peaks]), np.array([p[1] for p in peaks])
    trace = SpectrumTrace(cfg.grid.copy(), values, "f_hz", cost=cost)
    return DopplerResult(freqs, heights, trace, ns.numerical_rank, ns.singular_values, orders)


class DopplerEstimator(BaseEstimator):
    """Estimate dynamic-path Doppler frequencies from a CSI tensor.

    Parameters
    ----------
    n_paths : int
        Number of dynamic paths ``L`` (model order is not estimated).
    reference : "auto" or tuple
        ``(n, q, g)`` ratio to stack, or ``"auto"`` for :func:`select_reference`.
    grid : array-like, optional
        Candidate frequencies in Hz (0 excluded).  Defaults to a 1 Hz grid
        over [-305, 305] Hz.
    selection : {"auto", "peaks", "lattice"}
        Multi-path peak selection rule, see :func:`music_doppler`.
    window : int, optional
        Lag window ``P``; taken from the tensor's config when omitted.
    packet_interval : float, optional
        ``T_A`` in seconds; required when fitting a bare array.
    """

    def __init__(self, n_paths=1, *, reference="auto", grid=None, window=None, taylor_orders="auto",
                 rank_tolerance=DEFAULT_REL_TOL, signal_rank=None, noise_aware=False,
                 packet_interval=None, selection="auto"):
        self.n_paths = n_paths
        self.reference = reference
        self.grid = grid
        self.window = window
        self.taylor_orders = taylor_orders
        self.rank_tolerance = rank_tolerance
        self.signal_rank = signal_rank
        self.noise_aware = noise_aware
        self.packet_interval = packet_interval
        self.selection = selection

    def _make_config(self, Y) -> DopplerConfig:
        config = getattr(Y, "config", None)
        T_A = self.packet_interval or (config.packet_interval if config else None)
        P = self.window or (config.taylor_window if config else None)
        if T_A is None or P is None:
            raise InvalidConfigError("packet_interval and window are required for bare arrays")
        if self.reference == "auto":
            n, q, g = select_reference(Y, P)
        else:
            n, q, g = self.reference
        return DopplerConfig(
            packet_interval=T_A, window=P,
            grid=default_doppler_grid() if self.grid is None else self.grid,
            taylor_orders=self.taylor_orders, rank_tolerance=self.rank_tolerance,
            n=n, q=q, g=g, signal_rank=self.signal_rank, noise_aware=self.noise_aware,
            selection=self.selection,
        )

    def fit(self, Y, y=None):
        check_count("n_paths", self.n_paths)
        self.config_ = self._make_config(Y)
        self.stack_ = stack_dcsir(Y, self.config_)
        result = music_doppler(self.stack_, self.config_, self.n_paths)
        self.doppler_ = result.frequencies
        self.peak_heights_ = result.heights
        self.spectrum_ = result.spectrum
        self.numerical_rank_ = result.numerical_rank
        return self

    def predict(self, Y=None):
        """Doppler estimates in Hz; refits when ``Y`` is given."""
        if Y is not None:
            return self.fit(Y).doppler_
        check_is_fitted(self, "doppler_")
        return self.doppler_
