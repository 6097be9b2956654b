"""Pseudo-spectrum shapes of the multi-path estimator next to a
conventional MUSIC baseline.

The baseline runs eigen-null-space MUSIC on the temporal covariance of the
raw CSI at one antenna and subcarrier.  It never removes the static term,
so its strongest peak sits at 0 Hz.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .._validation import check_csi
from ..delay import delay_peak_functions
from ..doppler import default_doppler_grid
from ..pipeline import UplinkSensingEstimator
from ..signal_model import (OffsetTrace, PathSet, ScenarioSpec, SystemConfig, random_paths, static_component,
                            synthesize_csi)
from ..spectrum import SpectrumTrace, music_cost, music_spectrum


def conventional_music_doppler(Y, *, n: int = 1, g: int = 0, window: int = 30, signal_dim: int = 1,
                               packet_interval: Optional[float] = None, grid=None) -> SpectrumTrace:
    """MUSIC over ``y_n[m, g]`` with a ``window``-long smoothed temporal covariance.

    The grid includes 0 Hz.  ``signal_dim`` eigenvectors span the signal
    subspace; the rest form the null space.
    """
    y = check_csi(Y, min_antennas=1)
    cfg = getattr(Y, "config", None)
    T_A = packet_interval or (cfg.packet_interval if cfg else None)
    if T_A is None:
        raise ValueError("packet_interval is required for bare arrays")
    x = y[:, g, n]
    M = x.size
    if not 1 <= signal_dim < window <= M:
        raise ValueError(f"need 1 <= signal_dim < window <= M, got {signal_dim}, {window}, {M}")
    H = np.lib.stride_tricks.sliding_window_view(x, window).T  # (window, M - window + 1)
    R = H @ H.conj().T / H.shape[1]
    _, V = np.linalg.eigh(R)  # ascending eigenvalues
    null = V[:, : window - signal_dim]
    grid = np.arange(-305.0, 306.0) if grid is None else np.asarray(grid, dtype=float)
    steer = np.exp(2j * np.pi * np.outer(np.arange(window), grid) * T_A) / np.sqrt(window)
    cost = music_cost([steer], null)
    return SpectrumTrace(grid, music_spectrum(cost), "f_hz", cost=cost)


@dataclass
class SpectrumShapes:
    doppler: SpectrumTrace
    conventional: SpectrumTrace
    aoa: SpectrumTrace
    delays: list
    paths: PathSet
    estimates: np.ndarray
    extra: dict = field(default_factory=dict)

    def traces(self) -> dict:
        out = {"doppler_proposed": self.doppler, "doppler_conventional": self.conventional, "aoa": self.aoa}
        for i, t in enumerate(self.delays):
            out[f"delay_path{i}"] = t
        return out

    def write(self, out_dir) -> list:
        from pathlib import Path as FsPath

        out_dir = FsPath(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        return [t.to_csv(out_dir / f"spectrum_{name}.csv") for name, t in self.traces().items()]


def fig7_paths(config: SystemConfig, seed: int = 0, *, min_doppler_gap: float = 20.0,
               min_sin_gap: float = 0.1) -> PathSet:
    """Two dynamic and five static paths with resolvable Doppler and AoA."""
    rng = np.random.default_rng(seed)
    while True:
        paths = random_paths(ScenarioSpec(n_dynamic=2, n_static=5, min_abs_doppler=min_doppler_gap), rng)
        a, b = paths.dynamic
        if abs(a.doppler - b.doppler) > min_doppler_gap and abs(np.sin(a.aoa) - np.sin(b.aoa)) > min_sin_gap:
            return paths


def run_spectrum_shapes(paths: Optional[PathSet] = None, *, config: Optional[SystemConfig] = None,
                        seed: int = 0, offsets: Optional[OffsetTrace] = None) -> SpectrumShapes:
    """Noiseless spectra for an ``L = 2`` scenario (drawn from ``seed`` when ``paths`` is None).

    The conventional baseline sees the same tensor.  With the default zero
    offsets that is its best case; random carrier offsets would smear its
    spectrum altogether.
    """
    config = (config or SystemConfig()).replace(snr_db=None)
    if paths is None:
        paths = fig7_paths(config, seed)
    Y = synthesize_csi(config, paths, offsets)
    L = paths.n_dynamic
    est = UplinkSensingEstimator(L, static=static_component(paths, config)).fit(Y)
    conventional = conventional_music_doppler(Y, window=config.taylor_window, signal_dim=L,
                                              grid=np.arange(-305.0, 306.0))
    delays = []
    if hasattr(est, "delay_"):
        delays = delay_peak_functions(est.delay_.result_, est.delay_.pairs_.phi, config.symbol_duration)
    return SpectrumShapes(est.doppler_.spectrum_, conventional, est.aoa_.spectrum_, delays, paths,
                          est.predict(), {"grid": default_doppler_grid().size})
