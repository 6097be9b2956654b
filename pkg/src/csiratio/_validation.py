"""Input validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np

from .exceptions import InvalidConfigError


def as_samples(Y) -> np.ndarray:
    """Return the ``(M, G, N)`` complex sample array behind ``Y``.

    Accepts a :class:`~csiratio.signal_model.CsiTensor` or any array-like of
    rank 3.
    """
    samples = getattr(Y, "samples", Y)
    y = np.asarray(samples)
    if y.ndim != 3:
        raise InvalidConfigError(f"CSI must be a rank-3 array (M, G, N), got shape {y.shape}")
    if not np.iscomplexobj(y):
        y = y.astype(np.complex128)
    return y


def check_csi(Y, *, min_antennas: int = 2, min_packets: int = 2) -> np.ndarray:
    """Validate a CSI input and return its sample array."""
    y = as_samples(Y)
    M, G, N = y.shape
    if N < min_antennas:
        raise InvalidConfigError(f"need at least {min_antennas} antennas, got {N}")
    if M < min_packets:
        raise InvalidConfigError(f"need at least {min_packets} packets, got {M}")
    if G < 1:
        raise InvalidConfigError("need at least one subcarrier")
    if not np.all(np.isfinite(y)):
        raise InvalidConfigError("CSI contains non-finite values")
    return y


def check_pair(n_antennas: int, n: int, q: int):
    if not 0 <= n <= n_antennas - 1:
        raise IndexError(f"antenna index n={n} outside [0, {n_antennas - 1}]")
    if not 0 <= n - q <= n_antennas - 1:
        raise IndexError(f"reference antenna n-q={n - q} outside [0, {n_antennas - 1}]")


def denominator_floor(y: np.ndarray, rel_floor: float) -> float:
    return rel_floor * float(np.sqrt(np.mean(np.abs(y) ** 2)))


def check_count(name: str, value, minimum: int = 1) -> int:
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise InvalidConfigError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
