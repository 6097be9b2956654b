"""Bistatic trajectory recovery and constant-velocity Kalman smoothing.

Geometry: the receiver array sits at ``(-d0/2, 0)`` facing +y, the
transmitter at ``(d0/2, 0)``.  A target at range ``d_r`` from the receiver
and angle ``θ`` (from broadside, positive towards the transmitter) has
total path length ``c τ = d_r + |target - tx|``.  The law of cosines on the
tx-target-rx triangle gives

    d_r = (c²τ² - d0²) / (2 (cτ - d0 sinθ)),

and then ``x = d_r sinθ - d0/2``, ``y = d_r cosθ``.  The triangle exists
only when ``cτ > d0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..signal_model import SPEED_OF_LIGHT
from .output import write_rows

DEFAULT_BASELINE = 2.70  # meters, transmitter to receiver


@dataclass(frozen=True)
class TrajectoryPoint:
    t: float
    x: float
    y: float
    d_r: float
    theta: float
    tau: float
    feasible: bool = True


def bistatic_range(theta, tau, d0: float = DEFAULT_BASELINE):
    """Receiver-to-target range; NaN where ``cτ <= d0``."""
    theta = np.asarray(theta, dtype=float)
    L = SPEED_OF_LIGHT * np.asarray(tau, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        d_r = (L ** 2 - d0 ** 2) / (2 * (L - d0 * np.sin(theta)))
    return np.where(L > d0, d_r, np.nan)


def trajectory_from_estimates(times, thetas, taus, d0: float = DEFAULT_BASELINE) -> list[TrajectoryPoint]:
    """One point per frame; infeasible frames keep NaN coordinates and ``feasible=False``."""
    times, thetas, taus = (np.asarray(a, dtype=float) for a in (times, thetas, taus))
    if not times.shape == thetas.shape == taus.shape:
        raise ValueError("times, thetas and taus must have equal length")
    d_r = bistatic_range(thetas, taus, d0)
    out = []
    for t, th, tau, d in zip(times, thetas, taus, d_r):
        ok = bool(np.isfinite(d) and d >= 0)
        x = d * np.sin(th) - d0 / 2 if ok else np.nan
        y = d * np.cos(th) if ok else np.nan
        out.append(TrajectoryPoint(float(t), float(x), float(y), float(d) if ok else np.nan, float(th),
                                   float(tau), ok))
    return out


def geometry_of(x, y, d0: float = DEFAULT_BASELINE):
    """Inverse map: ``(θ, τ)`` seen from the receiver for target positions ``(x, y)``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    rx, ry = x + d0 / 2, y
    d_r = np.hypot(rx, ry)
    theta = np.arctan2(rx, ry)
    d_t = np.hypot(x - d0 / 2, y)
    return theta, (d_r + d_t) / SPEED_OF_LIGHT


def write_trajectory_csv(points, path):
    return write_rows(path, ["t", "x", "y"], ([p.t, p.x, p.y] for p in points))


def kalman_smooth(series, dt: float = 1.0, *, process_noise: float = 1e-4, measurement_noise=None,
                  initial_rate: float = 0.0) -> np.ndarray:
    """Forward constant-velocity Kalman filter.

    State is ``(value, rate)`` with white-acceleration process noise of
    spectral density ``process_noise``.  ``measurement_noise`` defaults to
    the variance of the first differences over two (a residual-based
    estimate).  Columns of a 2-D input (e.g. ``x, y``) are filtered
    independently.  NaN samples skip the update step.
    """
    z = np.asarray(series, dtype=float)
    if z.ndim == 2:
        return np.column_stack([kalman_smooth(z[:, k], dt, process_noise=process_noise,
                                              measurement_noise=measurement_noise, initial_rate=initial_rate)
                                for k in range(z.shape[1])])
    if z.ndim != 1 or z.size == 0:
        raise ValueError("series must be a non-empty 1-D or 2-D array")
    if measurement_noise is None:
        d = np.diff(z[np.isfinite(z)])
        measurement_noise = float(np.var(d) / 2) if d.size > 1 else 1.0
    r = max(float(measurement_noise), np.finfo(float).tiny)
    F = np.array([[1.0, dt], [0.0, 1.0]])
    Q = process_noise * np.array([[dt ** 3 / 3, dt ** 2 / 2], [dt ** 2 / 2, dt]])
    H = np.array([1.0, 0.0])
    first = z[np.isfinite(z)][0] if np.any(np.isfinite(z)) else 0.0
    x = np.array([first, initial_rate])
    P = np.diag([r, 1.0])
    out = np.empty_like(z)
    for k, zk in enumerate(z):
        if k:
            x = F @ x
            P = F @ P @ F.T + Q
        if np.isfinite(zk):
            S = H @ P @ H + r
            K = P @ H / S
            x = x + K * (zk - H @ x)
            P = P - np.outer(K, H @ P)
        out[k] = x[0]
    return out


def circular_track(times, *, center=(0.0, 3.0), radius: float = 1.0, speed: float = 1.5,
                   d0: float = DEFAULT_BASELINE, wavelength: float = SPEED_OF_LIGHT / 3e9):
    """Target on a circle: positions, ``(θ, τ)`` and bistatic Doppler per time.

    Doppler is ``-(1/λ) d(cτ)/dt``, evaluated analytically from the
    velocity.
    """
    times = np.asarray(times, dtype=float)
    w = speed / radius
    x = center[0] + radius * np.cos(w * times)
    y = center[1] + radius * np.sin(w * times)
    vx, vy = -radius * w * np.sin(w * times), radius * w * np.cos(w * times)
    theta, tau = geometry_of(x, y, d0)
    rx, tx = np.array([-d0 / 2, 0.0]), np.array([d0 / 2, 0.0])
    u_r = np.stack([x - rx[0], y - rx[1]]) / np.hypot(x - rx[0], y - rx[1])
    u_t = np.stack([x - tx[0], y - tx[1]]) / np.hypot(x - tx[0], y - tx[1])
    rate = (u_r[0] + u_t[0]) * vx + (u_r[1] + u_t[1]) * vy
    return x, y, theta, tau, -rate / wavelength
