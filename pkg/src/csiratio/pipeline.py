"""End-to-end estimator chain: Doppler, AoA (with the trivial-solution
guard), Doppler/AoA pairing and delay.

When the guard fires for a single dynamic path the AoA MUSIC output is not
trusted and the joint single-path estimator recovers AoA and delay
together from the blind static-term solve.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .aoa import GUARD_CV_THRESHOLD, AoaEstimator, phi_to_theta, trivial_solution_guard
from .delay import STATIC_MODES, DelayEstimator, joint_single_path, packet_schedule
from .doppler import DopplerEstimator
from .exceptions import CsiRatioError, EstimationError, FormatError, InvalidConfigError


@dataclass
class PathEstimate:
    """One recovered dynamic path."""

    path_id: int
    f_d_hz: float
    phi_rad: float
    theta_deg: float
    tau_s: Optional[float] = None
    flags: list = field(default_factory=list)

    def to_record(self) -> dict:
        return {"path_id": self.path_id, "f_d_hz": self.f_d_hz, "theta_deg": self.theta_deg,
                "tau_s": self.tau_s, "flags": list(self.flags)}


@dataclass
class EstimateSet:
    """Per-path estimates plus chain-level diagnostic flags."""

    paths: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    spectra: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.paths)

    def to_records(self) -> list[dict]:
        return [p.to_record() for p in self.paths]

    def to_json(self, path=None) -> str:
        text = json.dumps({"paths": self.to_records(), "flags": list(self.flags)}, indent=2)
        if path is not None:
            FsPath(path).write_text(text + "\n")
        return text

    @classmethod
    def from_json(cls, text: str) -> "EstimateSet":
        try:
            data = json.loads(text)
            paths = []
            for r in data["paths"]:
                theta = float(r["theta_deg"])
                paths.append(PathEstimate(int(r["path_id"]), float(r["f_d_hz"]),
                                          float(np.pi * np.sin(np.radians(theta))), theta,
                                          None if r["tau_s"] is None else float(r["tau_s"]),
                                          list(r.get("flags", []))))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed estimate set: {exc}") from exc
        return cls(paths, list(data.get("flags", [])))

    def as_array(self) -> np.ndarray:
        """``(L, 3)`` array of ``[f_D, φ, τ]`` with NaN for missing delays."""
        return np.array([[p.f_d_hz, p.phi_rad, np.nan if p.tau_s is None else p.tau_s]
                         for p in self.paths]).reshape(-1, 3)


def joint_windows(config, doppler: float, count: int = 8, size: int = 3) -> list[np.ndarray]:
    """``count`` packet windows of ``size`` packets spread over the frame."""
    W, M = config.taylor_window, config.packet_count
    span = (size - 1) * (W + 1)
    if span > M - 1:
        raise InvalidConfigError(f"{size} packets with gap {W + 1} do not fit in {M} packets")
    starts = np.unique(np.linspace(0, M - 1 - span, count).astype(int))
    return [packet_schedule(size, W, M, [doppler], packet_interval=config.packet_interval, start=int(s))
            for s in starts]


class UplinkSensingEstimator(BaseEstimator):
    """Full Doppler, AoA and delay chain for ``n_paths`` dynamic paths.

    Parameters
    ----------
    n_paths : int
        Number of dynamic paths ``L``.
    static_mode : {"oracle", "expectation", "los"}
        How the static component is pinned for the delay stage.
    static : array, optional
        ``(G, N)`` static component for ``"oracle"`` mode.
    joint_window_count : int
        Packet windows used by the joint single-path fallback.
    noise_aware : bool or "auto"
        Use the noise-floor rank rule in the subspace stages; ``"auto"``
        enables it when the tensor's config carries an SNR.
    """

    def __init__(self, n_paths=1, *, static_mode="oracle", static=None, los_delay=0.0, los_phi=0.0,
                 doppler_grid=None, aoa_grid=None, selection="auto", pairing="residual",
                 guard_threshold=GUARD_CV_THRESHOLD, joint_window_count=8, estimate_delay=True,
                 noise_aware="auto"):
        self.n_paths = n_paths
        self.static_mode = static_mode
        self.static = static
        self.los_delay = los_delay
        self.los_phi = los_phi
        self.doppler_grid = doppler_grid
        self.aoa_grid = aoa_grid
        self.selection = selection
        self.pairing = pairing
        self.guard_threshold = guard_threshold
        self.joint_window_count = joint_window_count
        self.estimate_delay = estimate_delay
        self.noise_aware = noise_aware

    def _spacing(self, cfg):
        return cfg.antenna_spacing / cfg.wavelength

    def _fail(self, stage, exc, partial):
        self.estimate_set_ = partial
        raise EstimationError(stage, exc, partial) from exc

    def fit(self, Y, y=None):
        cfg = getattr(Y, "config", None)
        if cfg is None:
            raise InvalidConfigError("UplinkSensingEstimator needs a CsiTensor with a config")
        if self.static_mode not in STATIC_MODES:
            raise InvalidConfigError(f"static_mode must be one of {STATIC_MODES}")
        L = int(self.n_paths)
        out = EstimateSet()
        spacing = self._spacing(cfg)
        noisy = cfg.snr_db is not None if self.noise_aware == "auto" else bool(self.noise_aware)

        try:
            self.doppler_ = DopplerEstimator(L, grid=self.doppler_grid, selection=self.selection,
                                             noise_aware=noisy).fit(Y)
        except CsiRatioError as exc:
            out.flags.append("doppler-failed")
            self._fail("doppler", exc, out)
        dopplers = self.doppler_.doppler_
        out.spectra["doppler"] = self.doppler_.spectrum_

        self.guard_ = trivial_solution_guard(Y, L, threshold=self.guard_threshold)
        self.aoa_ = None
        try:
            self.aoa_ = AoaEstimator(L, grid=self.aoa_grid, guard_threshold=self.guard_threshold,
                                     noise_aware=noisy).fit(Y)
            out.spectra["aoa"] = self.aoa_.spectrum_
        except CsiRatioError as exc:
            if not self.guard_.fired:
                out.paths = [PathEstimate(i, float(f), float("nan"), float("nan"), None, ["aoa-failed"])
                             for i, f in enumerate(dopplers)]
                out.flags.append("aoa-failed")
                self._fail("aoa", exc, out)

        if self.guard_.fired:
            out.flags.append("guard-fired")
            out.flags.append("joint-estimator")
            self._fit_joint(Y, cfg, float(dopplers[0]), spacing, out)
        else:
            self._fit_paired(Y, cfg, dopplers, self.aoa_.phi_, spacing, out)
        self.estimate_set_ = out
        return self

    def _fit_joint(self, Y, cfg, f0, spacing, out):
        windows = joint_windows(cfg, f0, self.joint_window_count)
        est = PathEstimate(0, f0, float("nan"), float("nan"))
        out.paths = [est]
        try:
            res = joint_single_path(Y, f0, windows, config=cfg, mode=self.static_mode, static=self.static,
                                    los_delay=self.los_delay, los_phi=self.los_phi, window=cfg.taylor_window)
        except CsiRatioError as exc:
            est.flags.append("joint-failed")
            self._fail("joint", exc, out)
        self.joint_ = res
        est.phi_rad = float(res.phi)
        est.theta_deg = float(np.degrees(phi_to_theta(res.phi, spacing)))
        if self.estimate_delay:
            est.tau_s = float(res.delay)
        est.flags.extend(["joint", *res.flags])

    def _fit_paired(self, Y, cfg, dopplers, phis, spacing, out):
        out.paths = [PathEstimate(i, float(f), float(p), float(np.degrees(phi_to_theta(p, spacing))))
                     for i, (f, p) in enumerate(zip(dopplers, phis))]
        if not self.estimate_delay:
            return
        self.delay_ = DelayEstimator(static_mode=self.static_mode, static=self.static, los_delay=self.los_delay,
                                     los_phi=self.los_phi, pairing=self.pairing)
        try:
            self.delay_.fit(Y, dopplers=dopplers, phis=phis)
        except CsiRatioError as exc:
            out.flags.append("delay-failed")
            self._fail("delay", exc, out)
        pairs = self.delay_.pairs_
        out.paths = [PathEstimate(i, float(f), float(p), float(np.degrees(phi_to_theta(p, spacing))),
                                  float(t), list(pairs.flags))
                     for i, (f, p, t) in enumerate(zip(pairs.doppler, pairs.phi, self.delay_.delays_))]
        if self.static_mode == "expectation":
            for p in out.paths:
                p.flags.append("relative")

    def predict(self, Y=None):
        """``(L, 3)`` array of ``[f_D (Hz), φ (rad), τ (s)]``."""
        if Y is not None:
            self.fit(Y)
        check_is_fitted(self, "estimate_set_")
        return self.estimate_set_.as_array()
