"""Delay estimation: two-packet static-term solves, joint single-path AoA and
delay, Doppler/AoA pairing and the multi-path delay system.

Dividing numerator and denominator of ``ξ_{n,n-q}`` by the first dynamic
path's antenna-``n`` term gives

    ξ[m] = e^{jqφ1} (S'_n + D'[m]) / (S'_{n-q} + D'[m]),
    S'_k = S_k e^{-jkφ1} e^{j2π g τ1 / T} / α1,   D'[m] = e^{j2π m T_A f1},

so a few packets pin ``S'`` by least squares, and the phase of
``S'_n / S_n`` over ``(g, n)`` is a plane with slopes ``2πτ1/T`` and
``-φ1``.  Without ``S_n`` the common delay is not identifiable: shifting
every delay by ``x`` is absorbed by the timing offset.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_count, check_csi, check_pair, denominator_floor
from .aoa import aoa_basis_d1
from .doppler import doppler_basis_b1
from .exceptions import DegenerateDenominatorError, IdentifiabilityWarning, IllConditionedError, InvalidConfigError
from .numerics import pinv_solve
from .spectrum import SpectrumTrace

MAX_CONDITION = 1e8
STATIC_MODES = ("oracle", "expectation", "los")


def _wrap(x):
    return (np.asarray(x) + np.pi) % (2 * np.pi) - np.pi


def _ratio(y, n, q, packets, g, rel_floor=1e-12):
    den = y[packets, g, n - q]
    if np.any(np.abs(den) < denominator_floor(y, rel_floor)):
        raise DegenerateDenominatorError(f"reference antenna {n - q} below floor")
    return y[packets, g, n] / den


def _check_packets(packets, M, window=None):
    packets = np.asarray(packets, dtype=int)
    if packets.ndim != 1 or np.any(packets < 0) or np.any(packets > M - 1):
        raise IndexError(f"packet indices must lie in [0, {M - 1}]")
    if np.unique(packets).size != packets.size:
        raise InvalidConfigError("packet indices must be distinct")
    if window is not None and packets.size > 1:
        gaps = np.abs(np.diff(np.sort(packets)))
        if np.any(gaps <= window):
            raise InvalidConfigError(f"packet gaps must exceed the window P={window}")
    return packets


def _solve(A, b, what):
    # equilibrate columns so the condition number reflects geometry, not unknown scale
    scale = np.linalg.norm(A, axis=0)
    scale[scale == 0] = 1.0
    res = pinv_solve(A / scale, b)
    if not np.isfinite(res.condition_number) or res.condition_number > MAX_CONDITION or res.rank_deficient:
        raise IllConditionedError(f"{what}: condition number {res.condition_number:.3g}", res.condition_number)
    return res.__class__(res.x / scale, res.residual, res.rank, res.condition_number, res.rank_deficient)


def _circle_separation(packets, dopplers, packet_interval):
    D = np.exp(2j * np.pi * np.outer(packets, dopplers) * packet_interval)  # (K, L)
    i, j = np.triu_indices(len(packets), 1)
    return float(np.min(np.abs(D[i] - D[j])))


def packet_schedule(count: int, window: int, packet_count: int, dopplers=None, *,
                    packet_interval: float = 1e-3, start: int = 0) -> np.ndarray:
    """``count`` uniformly spaced packets with gap at least ``window + 1``.

    Without Doppler estimates the smallest admissible gap is used.  With
    them the gap maximizes the smallest distance between the phasors
    ``e^{j2π m T_A f}`` of different packets, which keeps the static-term
    systems away from the aliased case ``f · gap · T_A ∈ Z`` where all rows
    coincide.
    """
    check_count("count", count)
    lo = window + 1
    hi = (packet_count - 1 - start) // (count - 1) if count > 1 else lo
    if hi < lo:
        raise InvalidConfigError(f"{count} packets with gap {lo} do not fit in {packet_count} packets")
    if dopplers is None or count == 1:
        return start + lo * np.arange(count)
    dopplers = np.atleast_1d(np.asarray(dopplers, dtype=float))
    best, best_sep = lo, -1.0
    for gap in range(lo, hi + 1):
        sep = _circle_separation(start + gap * np.arange(count), dopplers, packet_interval)
        if sep > best_sep + 1e-12:
            best, best_sep = gap, sep
    return start + best * np.arange(count)


def ls_static_prime(Y, n: int, q: int, g: int, packets, f_doppler: float, *, packet_interval: float,
                    phi: float = 0.0, window: Optional[int] = None) -> tuple[complex, complex]:
    """Solve ``S'_n - ξ̃[m] S'_{n-q} = (ξ̃[m] - 1) D'[m]`` over ``packets``.

    ``ξ̃ = ξ e^{-jqφ}`` removes the array phase between the two antennas;
    with ``φ = 0`` the rows are exactly ``[1, -ξ(m)]``.  Two packets give a
    square system, more give a least-squares fit.
    """
    y = check_csi(Y)
    M, G, N = y.shape
    check_pair(N, n, q)
    packets = _check_packets(packets, M, window)
    if packets.size < 2:
        raise InvalidConfigError("need at least two packets")
    xi = _ratio(y, n, q, packets, g) * np.exp(-1j * q * phi)
    D = np.exp(2j * np.pi * packets * packet_interval * f_doppler)
    A = np.column_stack([np.ones_like(xi), -xi])
    res = _solve(A, (xi - 1) * D, "static-prime system")
    return complex(res.x[0]), complex(res.x[1])


def ls_static_prime_blind(Y, n: int, q: int, g: int, packets, f_doppler: float, *,
                          packet_interval: float, window: Optional[int] = None) -> tuple[complex, complex, float]:
    """Static-prime solve that also recovers the array phase.

    Writing ``C = e^{jqφ}`` the relation ``ξ (S'_{n-q} + D') = C (S'_n + D')``
    is linear in ``(C S'_n, S'_{n-q}, C)``, so three or more packets give
    ``S'_n``, ``S'_{n-q}`` and ``qφ`` (mod 2π) without an AoA estimate.
    """
    y = check_csi(Y)
    M, G, N = y.shape
    check_pair(N, n, q)
    packets = _check_packets(packets, M, window)
    if packets.size < 3:
        raise InvalidConfigError("the blind solve needs at least three packets")
    xi = _ratio(y, n, q, packets, g)
    D = np.exp(2j * np.pi * packets * packet_interval * f_doppler)
    A = np.column_stack([-np.ones_like(xi), xi, -D])
    res = _solve(A, -xi * D, "blind static-prime system")
    cs_n, s_ref, c = res.x
    if abs(c) == 0:
        raise IllConditionedError("array phase estimate vanished", float("inf"))
    return complex(cs_n / c), complex(s_ref), float(np.angle(c))


def static_prime_field(Y, f_doppler: float, packets, *, packet_interval: float, phi: Optional[float] = None,
                       reference: int = 0, window: Optional[int] = None) -> np.ndarray:
    """``S'_n[g]`` for every antenna and subcarrier, shape ``(G, N)``.

    Each antenna is paired with ``reference``.  With ``phi=None`` the blind
    solve is used and needs three or more packets.
    """
    y = check_csi(Y)
    M, G, N = y.shape
    out = np.empty((G, N), dtype=complex)
    for g in range(G):
        refs = []
        for n in range(N):
            if n == reference:
                continue
            q = n - reference
            if phi is None:
                s_n, s_r, _ = ls_static_prime_blind(y, n, q, g, packets, f_doppler,
                                                    packet_interval=packet_interval, window=window)
            else:
                s_n, s_r = ls_static_prime(y, n, q, g, packets, f_doppler, packet_interval=packet_interval,
                                           phi=phi, window=window)
            out[g, n] = s_n
            refs.append(s_r)
        out[g, reference] = np.mean(refs)
    return out


@dataclass(frozen=True)
class PlaneFit:
    """``angle = slope_g * g + slope_n * n + offset`` after unwrapping."""

    slope_g: float
    slope_n: float
    offset: float
    residual: float

    def delay(self, symbol_duration: float) -> float:
        return float((self.slope_g * symbol_duration / (2 * np.pi)) % symbol_duration)

    @property
    def phi(self) -> float:
        return float(_wrap(-self.slope_n))


def phase_plane_fit(r: np.ndarray) -> PlaneFit:
    """Least-squares plane through the unwrapped phase of ``r[g, n]``.

    The phase is unwrapped along ``n`` at ``g = 0`` first, then along ``g``
    for every antenna, which keeps the antenna columns consistent.
    """
    r = np.asarray(r)
    G, N = r.shape
    ph = np.angle(r)
    ph[0] = np.unwrap(ph[0])
    ph = np.unwrap(ph, axis=0)
    gg, nn = np.meshgrid(np.arange(G), np.arange(N), indexing="ij")
    A = np.column_stack([gg.ravel(), nn.ravel(), np.ones(G * N)])
    coef, *_ = np.linalg.lstsq(A, ph.ravel(), rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - ph.ravel()) ** 2)))
    return PlaneFit(float(coef[0]), float(coef[1]), float(coef[2]), resid)


def los_static_reference(config, los_delay: float, los_phi: float) -> np.ndarray:
    """Dominant-LOS surrogate ``S_n[g] ≈ e^{j(nφ0 - 2π g τ0 / T)}`` of shape ``(G, N)``."""
    g = np.arange(config.subcarrier_count)[:, None]
    n = np.arange(config.antenna_count)[None, :]
    return np.exp(1j * (n * los_phi - 2 * np.pi * g * los_delay / config.symbol_duration))


def phase_excursion(primes: np.ndarray) -> float:
    """Largest circular spread of ``angle(S')`` across windows over all ``(g, n)``."""
    primes = np.asarray(primes)
    if primes.shape[0] < 2:
        return 0.0
    ref = primes / primes[:1]
    spread = np.ptp(np.angle(ref), axis=0)
    return float(np.max(spread))


@dataclass
class SinglePathEstimate:
    phi: float
    delay: float
    fit: PlaneFit
    primes: np.ndarray
    static: np.ndarray
    mode: str
    flags: tuple = ()


def joint_single_path(Y, f_doppler: float, windows: Sequence[Sequence[int]], *, config=None,
                      packet_interval: Optional[float] = None, symbol_duration: Optional[float] = None,
                      mode: str = "expectation", static=None, phi: Optional[float] = None,
                      los_delay: float = 0.0, los_phi: float = 0.0, window: Optional[int] = None,
                      excursion_floor: float = np.pi) -> SinglePathEstimate:
    """Joint AoA and delay of a single dynamic path.

    ``S'`` is solved in every packet window; ``mode`` selects how ``S_n[g]``
    is obtained:

    ``"oracle"``
        ``static`` holds the true ``(G, N)`` static component.
    ``"expectation"``
        the mean of ``S'`` over windows.  This pins the static term only up
        to the average dynamic phase, so the returned delay and AoA are
        deviations from their window average; the phase must sweep a wide
        range across windows or an :class:`IdentifiabilityWarning` is issued.
    ``"los"``
        a dominant line-of-sight surrogate built from ``los_delay`` and
        ``los_phi``.

    ``phi`` (e.g. from AoA MUSIC) selects the two-unknown solve; without it
    each window needs three packets and the blind solve is used.
    """
    if mode not in STATIC_MODES:
        raise InvalidConfigError(f"mode must be one of {STATIC_MODES}")
    y = check_csi(Y)
    cfg = config if config is not None else getattr(Y, "config", None)
    T_A = packet_interval or (cfg.packet_interval if cfg else None)
    T = symbol_duration or (cfg.symbol_duration if cfg else None)
    if T_A is None or T is None:
        raise InvalidConfigError("packet_interval and symbol_duration are required for bare arrays")
    if not windows:
        raise InvalidConfigError("at least one packet window is required")
    primes = np.stack([static_prime_field(y, f_doppler, w, packet_interval=T_A, phi=phi, window=window)
                       for w in windows])
    flags = []
    if mode == "oracle":
        if static is None:
            raise InvalidConfigError("oracle mode needs the static component")
        S = np.asarray(static)
    elif mode == "los":
        if cfg is None:
            raise InvalidConfigError("los mode needs a SystemConfig")
        S = los_static_reference(cfg, los_delay, los_phi)
    else:
        S = primes.mean(axis=0) if static is None else np.asarray(static)
        if phase_excursion(primes) < excursion_floor:
            warnings.warn("dynamic phase spans less than the required range across windows; "
                          "the delay cannot be separated from the timing offset", IdentifiabilityWarning,
                          stacklevel=2)
            flags.append("unidentifiable")
        flags.append("relative")
    if S.shape != primes.shape[1:]:
        raise InvalidConfigError(f"static component must have shape {primes.shape[1:]}, got {S.shape}")
    fits = [phase_plane_fit(p / S) for p in primes]
    fit = fits[-1]
    return SinglePathEstimate(fit.phi, fit.delay(T), fit, primes, S, mode, tuple(flags))


@dataclass
class PairedPathEstimates:
    """Doppler/AoA pairs after assignment, aligned by path index."""

    doppler: np.ndarray
    phi: np.ndarray
    scores: np.ndarray
    score_matrix: np.ndarray
    assignment: np.ndarray
    delays: Optional[np.ndarray] = None
    flags: list = field(default_factory=list)

    def __len__(self):
        return len(self.doppler)


def pairing_scores(manifold, Y, dopplers, phis, *, packet_interval: float) -> np.ndarray:
    """``|d1(φ_l')^H Ā conj(b1(f_l))|`` for every Doppler ``l`` (rows) and AoA ``l'`` (columns).

    Column ``p`` of ``Ā`` carries ``b1(f)[p]`` as a coefficient, so the
    matched filter over ``p`` uses the conjugate basis.
    """
    A = manifold.matrix
    P = A.shape[1]
    D1 = aoa_basis_d1(np.asarray(phis, dtype=float), Y, manifold.m, manifold.g)
    B = np.stack([doppler_basis_b1(float(f), P, packet_interval) for f in dopplers], axis=1)
    return np.abs(D1.conj().T @ A @ B.conj()).T


def _path_system(y, dopplers, phis, packets, g, n, reference, packet_interval):
    """Rows of the exact multi-path relation for antenna ``n`` against ``reference``."""
    q = n - reference
    xt = _ratio(y, n, q, packets, g) * np.exp(-1j * q * phis[0])
    D = np.exp(2j * np.pi * np.outer(packets, dopplers) * packet_interval)
    cols = [np.ones_like(xt), -xt]
    for l in range(1, len(dopplers)):
        d = phis[l] - phis[0]
        cols.append(D[:, l] * (np.exp(1j * n * d) - xt * np.exp(1j * (n - q) * d)))
    return np.column_stack(cols), (xt - 1) * D[:, 0]


def assignment_residual(Y, dopplers, phis, packets, *, packet_interval: float, subcarriers=None,
                        reference: int = 0) -> float:
    """Relative LS residual of the exact multi-path relation for one pairing.

    Needs more than ``L + 1`` packets; with the true pairing the residual is
    zero on noiseless data, any other pairing leaves a misfit.
    """
    y = check_csi(Y)
    M, G, N = y.shape
    gs = range(G) if subcarriers is None else subcarriers
    num = den = 0.0
    for g in gs:
        for n in range(N):
            if n == reference:
                continue
            A, b = _path_system(y, dopplers, phis, packets, g, n, reference, packet_interval)
            scale = np.linalg.norm(A, axis=0)
            scale[scale == 0] = 1.0
            res = pinv_solve(A / scale, b)
            num += res.residual ** 2
            den += float(np.linalg.norm(b)) ** 2
    return float(np.sqrt(num / den)) if den > 0 else 0.0


def pair_doppler_aoa(manifold, Y, dopplers, phis, *, packet_interval: float, method: str = "residual",
                     packets=None, window: Optional[int] = None) -> PairedPathEstimates:
    """Match Doppler and AoA estimates.

    ``method="score"`` maximizes the total matched-filter score of
    :func:`pairing_scores` by Hungarian assignment.  That score relies on
    the first-order Taylor model, which is poor when the series converges
    slowly, so the default ``"residual"`` instead tries every permutation
    and keeps the one with the smallest :func:`assignment_residual` over an
    overdetermined packet set (``score_matrix`` then holds the negated
    residual of each permutation).
    """
    dopplers = np.asarray(dopplers, dtype=float)
    phis = np.asarray(phis, dtype=float)
    if dopplers.shape != phis.shape or dopplers.ndim != 1:
        raise InvalidConfigError("Doppler and AoA lists must have equal length")
    L = dopplers.size
    if method == "score":
        scores = pairing_scores(manifold, Y, dopplers, phis, packet_interval=packet_interval)
        rows, cols = linear_sum_assignment(scores, maximize=True)
        order = np.empty(L, dtype=int)
        order[rows] = cols
        return PairedPathEstimates(dopplers, phis[order], scores[np.arange(L), order], scores, order)
    if method != "residual":
        raise InvalidConfigError("method must be 'residual' or 'score'")
    if L == 1:
        scores = pairing_scores(manifold, Y, dopplers, phis, packet_interval=packet_interval)
        return PairedPathEstimates(dopplers, phis, scores[0], scores, np.zeros(1, dtype=int))
    y = check_csi(Y)
    M, G, _ = y.shape
    P = manifold.matrix.shape[1] if window is None else window
    if packets is None:
        count = min(L + 2, (M - 1) // (P + 1) + 1)
        packets = packet_schedule(count, P, M, dopplers, packet_interval=packet_interval)
    if len(packets) <= L + 1:
        raise InvalidConfigError("residual pairing needs more than L + 1 packets")
    subcarriers = np.unique(np.linspace(0, G - 1, min(G, 8)).astype(int))
    perms = list(itertools.permutations(range(L)))
    resid = np.array([assignment_residual(y, dopplers, phis[list(pm)], packets, packet_interval=packet_interval,
                                          subcarriers=subcarriers) for pm in perms])
    best = np.array(perms[int(np.argmin(resid))])
    return PairedPathEstimates(dopplers, phis[best], np.full(L, -resid.min()), -resid, best)


@dataclass
class MultiDelayResult:
    delays: np.ndarray
    relative: np.ndarray
    ratios: np.ndarray
    first: PlaneFit
    primes: Optional[np.ndarray] = None
    static: Optional[np.ndarray] = None


def multi_delay_ls(Y, pairs: PairedPathEstimates, packets, static, *, packet_interval: float,
                   symbol_duration: float, reference: int = 0, window: Optional[int] = None) -> MultiDelayResult:
    """Absolute delays of ``L`` paired paths from an ``(L+1)``-packet system.

    Per subcarrier and antenna ``n`` (paired with ``reference``) the unknowns
    are ``S'_n``, ``S'_ref`` and ``β_l = (α_l/α_1) e^{-j2π g (τ_l - τ_1)/T}``
    for ``l >= 2``; the coefficient of ``β_l`` is
    ``D'_l[m] (e^{jnΔφ_l} - ξ̃[m] e^{j(n-q)Δφ_l})`` with ``Δφ_l = φ_l - φ_1``.
    ``τ_1`` comes from the plane fit of ``S'_n / S_n``; ``τ_l - τ_1`` from the
    (negative) slope of ``angle(β_l)`` over ``g``.
    """
    y = check_csi(Y)
    M, G, N = y.shape
    L = len(pairs)
    packets = _check_packets(packets, M, window)
    if packets.size < L + 1:
        raise InvalidConfigError(f"need at least L+1={L + 1} packets, got {packets.size}")
    S = np.asarray(static)
    if S.shape != (G, N):
        raise InvalidConfigError(f"static component must have shape {(G, N)}, got {S.shape}")
    f, phi = pairs.doppler, pairs.phi
    primes = np.empty((G, N), dtype=complex)
    betas = np.zeros((G, N - 1, max(L - 1, 0)), dtype=complex)
    for g in range(G):
        refs = []
        for k, n in enumerate(i for i in range(N) if i != reference):
            A, b = _path_system(y, f, phi, packets, g, n, reference, packet_interval)
            res = _solve(A, b, "multi-delay system")
            primes[g, n] = res.x[0]
            refs.append(res.x[1])
            betas[g, k] = res.x[2:]
        primes[g, reference] = np.mean(refs)
    first = phase_plane_fit(primes / S)
    tau1 = first.delay(symbol_duration)
    ratios = betas.mean(axis=1)  # (G, L-1)
    rel = np.zeros(L)
    for l in range(1, L):
        ph = np.unwrap(np.angle(ratios[:, l - 1]))
        slope = np.polyfit(np.arange(G), ph, 1)[0]
        rel[l] = -slope * symbol_duration / (2 * np.pi)
    delays = (tau1 + rel) % symbol_duration
    return MultiDelayResult(delays, rel, ratios, first, primes, S)


def delay_peak_functions(result: MultiDelayResult, phis, symbol_duration: float,
                         points: int = 1000) -> list:
    """Per-path delay pseudo-spectra over ``[0, T)``.

    Path 1's phase ramp is ``S'_n / S_n`` with the array phase removed and
    averaged over antennas; path ``l`` multiplies it by ``conj(β_l)``.  Each
    row is the normalized periodogram ``|Σ_g r[g] e^{-j2π g τ / T}|^2`` and
    has a single peak anywhere in ``[0, T)``.
    """
    if result.primes is None or result.static is None:
        raise InvalidConfigError("result carries no static-prime field")
    G, N = result.primes.shape
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    r1 = np.mean(result.primes / result.static * np.exp(1j * np.arange(N) * phis[0])[None, :], axis=1)
    rows = [r1] + [r1 * np.conj(result.ratios[:, l]) for l in range(result.ratios.shape[1])]
    tau = np.arange(points) * symbol_duration / points
    E = np.exp(-2j * np.pi * np.outer(np.arange(G), tau) / symbol_duration)  # (G, points)
    out = []
    for r in rows:
        r = r / np.maximum(np.abs(r), np.finfo(float).tiny)
        out.append(SpectrumTrace(tau, np.abs(r @ E) ** 2 / G ** 2, "tau_s"))
    return out


class DelayEstimator(BaseEstimator):
    """Delays of paired dynamic paths.

    ``fit(Y, dopplers=..., phis=...)`` takes Doppler and AoA estimates
    (e.g. from :class:`~csiratio.doppler.DopplerEstimator` and
    :class:`~csiratio.aoa.AoaEstimator`), pairs them and solves for the
    delays.  ``static_mode`` selects how ``S_n[g]`` is pinned, see
    :func:`joint_single_path`.
    """

    def __init__(self, *, static_mode="oracle", static=None, packets=None, los_delay=0.0, los_phi=0.0,
                 pairing="residual"):
        self.static_mode = static_mode
        self.pairing = pairing
        self.static = static
        self.packets = packets
        self.los_delay = los_delay
        self.los_phi = los_phi

    def _static(self, Y, cfg, f0, phi0, packets):
        if self.static_mode == "oracle":
            if self.static is None:
                raise InvalidConfigError("oracle mode needs the static component")
            return np.asarray(self.static)
        if self.static_mode == "los":
            return los_static_reference(cfg, self.los_delay, self.los_phi)
        if self.static_mode == "expectation":
            if self.static is not None:
                return np.asarray(self.static)
            windows = [packets[i:i + 2] for i in range(len(packets) - 1)]
            primes = np.stack([static_prime_field(Y, f0, w, packet_interval=cfg.packet_interval, phi=phi0)
                               for w in windows])
            return primes.mean(axis=0)
        raise InvalidConfigError(f"static_mode must be one of {STATIC_MODES}")

    def fit(self, Y, y=None, *, dopplers, phis):
        from .aoa import stack_manifold

        cfg = getattr(Y, "config", None)
        if cfg is None:
            raise InvalidConfigError("DelayEstimator needs a CsiTensor with a config")
        dopplers = np.atleast_1d(np.asarray(dopplers, dtype=float))
        phis = np.atleast_1d(np.asarray(phis, dtype=float))
        L = dopplers.size
        self.manifold_ = stack_manifold(Y, cfg.taylor_window)
        self.pairs_ = pair_doppler_aoa(self.manifold_, Y, dopplers, phis, packet_interval=cfg.packet_interval,
                                       method=self.pairing)
        packets = (np.asarray(self.packets) if self.packets is not None
                   else packet_schedule(L + 1, cfg.taylor_window, cfg.packet_count, dopplers,
                                        packet_interval=cfg.packet_interval))
        S = self._static(Y, cfg, self.pairs_.doppler[0], self.pairs_.phi[0], packets)
        self.result_ = multi_delay_ls(Y, self.pairs_, packets, S, packet_interval=cfg.packet_interval,
                                      symbol_duration=cfg.symbol_duration)
        self.delays_ = self.result_.delays
        self.pairs_.delays = self.delays_
        return self

    def predict(self, Y=None, **kwargs):
        if Y is not None:
            return self.fit(Y, **kwargs).delays_
        check_is_fitted(self, "delays_")
        return self.delays_
