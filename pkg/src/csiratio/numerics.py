"""Small linear-algebra and peak-search kernels used by the estimators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InsufficientPeaksError

DEFAULT_REL_TOL = 1e-3


@dataclass(frozen=True)
class NullSpaceResult:
    basis: np.ndarray
    numerical_rank: int
    singular_values: np.ndarray
    signal_basis: np.ndarray


def null_space(A, rel_tol: float = DEFAULT_REL_TOL, *, rank: int | None = None) -> NullSpaceResult:
    """Left null space of ``A`` from its SVD.

    Left singular vectors whose singular value falls below
    ``rel_tol * sigma_max`` span the null space.  Passing ``rank`` fixes the
    signal-subspace dimension instead.  An all-zero matrix has rank 0 and
    the identity as null basis.
    """
    A = np.asarray(A)
    if A.size == 0:
        raise ValueError("null_space of an empty matrix")
    U, s, _ = np.linalg.svd(A, full_matrices=True)
    if rank is None:
        smax = s[0] if s.size else 0.0
        rank = 0 if smax == 0 else int(np.count_nonzero(s >= rel_tol * smax))
    rank = int(min(max(rank, 0), U.shape[1]))
    return NullSpaceResult(U[:, rank:], rank, s, U[:, :rank])


def noise_floor_rank(s: np.ndarray, n_rows: int, n_cols: int, rel_tol: float = DEFAULT_REL_TOL,
                     factor: float = 1.5) -> int:
    """Numerical rank with a noise-aware threshold.

    The noise level is estimated from the median singular value, taken as
    the Marchenko-Pastur bulk centre ``sigma * sqrt(max(r, c))``; the bulk
    edge is then ``sigma * (sqrt(r) + sqrt(c))``.  Singular values above
    ``max(rel_tol * s_max, factor * edge)`` count as signal.
    """
    s = np.asarray(s)
    if s.size == 0 or s[0] == 0:
        return 0
    short, long_ = sorted((n_rows, n_cols))
    sigma = np.median(s) / np.sqrt(long_)
    edge = sigma * (np.sqrt(short) + np.sqrt(long_))
    threshold = max(rel_tol * s[0], factor * edge)
    return int(np.count_nonzero(s > threshold))


@dataclass(frozen=True)
class LstsqResult:
    x: np.ndarray
    residual: float
    rank: int
    condition_number: float
    rank_deficient: bool


def pinv_solve(A, b, rel_tol: float = 1e-12) -> LstsqResult:
    """Minimum-norm least-squares solution of ``A x ≈ b`` via the pseudo-inverse."""
    A = np.atleast_2d(np.asarray(A))
    b = np.asarray(b)
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    smax = s[0] if s.size else 0.0
    keep = s > rel_tol * smax if smax > 0 else np.zeros_like(s, dtype=bool)
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    x = (Vh.conj().T * inv) @ (U.conj().T @ b)
    residual = float(np.linalg.norm(A @ x - b))
    cond = float(smax / s[-1]) if s.size and s[-1] > 0 else float("inf")
    rank = int(np.count_nonzero(keep))
    return LstsqResult(x, residual, rank, cond, rank < min(A.shape))


def quadratic_apex(y_left: float, y_mid: float, y_right: float) -> tuple[float, float]:
    """Offset (in grid steps) and height of the parabola through three points."""
    denom = y_left - 2 * y_mid + y_right
    if denom == 0:
        return 0.0, y_mid
    delta = 0.5 * (y_left - y_right) / denom
    delta = float(np.clip(delta, -0.5, 0.5))
    height = y_mid - 0.25 * (y_left - y_right) * delta
    return delta, float(height)


def find_peaks(values, grid, count: int, *, refine_on=None) -> list[tuple[float, float]]:
    """Top ``count`` strict interior local maxima as ``(location, height)``.

    Locations are refined by three-point quadratic interpolation; results
    are sorted by decreasing height.  ``refine_on`` optionally supplies a
    smoother companion curve for the interpolation (MUSIC spectra pass the
    projection cost, whose minimum is locally quadratic, because the raw
    ``1/cost`` peak is far too sharp for a parabola).
    """
    v = np.asarray(values, dtype=float)
    x = np.asarray(grid, dtype=float)
    if v.shape != x.shape or v.size < 3:
        raise ValueError("values and grid must have equal length >= 3")
    r = v if refine_on is None else -np.asarray(refine_on, dtype=float)
    interior = np.flatnonzero((v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])) + 1
    if interior.size < count:
        raise InsufficientPeaksError(int(interior.size), count)
    order = interior[np.argsort(v[interior], kind="stable")[::-1]][:count]
    peaks = []
    for i in order:
        delta, height = quadratic_apex(r[i - 1], r[i], r[i + 1])
        if refine_on is not None:
            height = v[i] if height >= 0 else float(-1.0 / height)
        step = x[i + 1] - x[i] if delta >= 0 else x[i] - x[i - 1]
        peaks.append((float(x[i] + delta * step), float(height)))
    return sorted(peaks, key=lambda pk: -pk[1])
