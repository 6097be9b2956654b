"""NMSE-versus-SNR sweeps of the estimator chain.

NMSE for Doppler and delay is ``mean |est - true|^2 / |true|^2``; for AoA
the spatial-frequency error is normalized by ``π^2`` because the true value
can sit at zero.  Delay errors are wrapped modulo ``T`` first.  Trials that
raise an estimator error are counted and left out of the averages.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..exceptions import CsiRatioError, InvalidConfigError
from ..pipeline import UplinkSensingEstimator
from ..signal_model import (OffsetModel, ScenarioSpec, SystemConfig, generate_offsets, random_paths,
                            static_component, synthesize_csi)
from .output import write_rows

KINDS = ("doppler", "aoa", "delay")
NORMALIZATION = {"doppler": "|true|^2", "aoa": "pi^2 (spatial frequency)", "delay": "|true|^2 (error wrapped mod T)"}


@dataclass
class SweepSpec:
    """What to sweep.  ``snr_db`` entries may be None for the noiseless limit."""

    snr_db: list = field(default_factory=lambda: [0, 5, 10, 15, 20])
    trials: int = 100
    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)
    offsets: str = "iid-uniform"
    static_mode: str = "oracle"
    seed: int = 0
    config: SystemConfig = field(default_factory=SystemConfig)

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidConfigError("trials must be >= 1")
        if not self.snr_db:
            raise InvalidConfigError("snr_db must list at least one point")
        if self.scenario.n_dynamic < 1:
            raise InvalidConfigError("the sweep needs at least one dynamic path")
        if self.static_mode != "oracle":
            raise InvalidConfigError("sweeps score absolute delays and need static_mode='oracle'")

    def to_dict(self) -> dict:
        return {"snr_db": list(self.snr_db), "trials": self.trials, "scenario": self.scenario.to_dict(),
                "offsets": self.offsets, "static_mode": self.static_mode, "seed": self.seed,
                "config": self.config.to_dict()}


@dataclass(frozen=True)
class NmseRecord:
    kind: str
    snr_db: Optional[float]
    nmse: float
    ci: float
    trials: int
    failures: int

    def row(self):
        return [self.kind, "" if self.snr_db is None else self.snr_db, self.nmse, self.ci, self.trials,
                self.failures]


def trial_seed(seed: int, point: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, point, trial])


def match_paths(est: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """Index into ``est`` for each true path, by nearest Doppler."""
    cost = np.abs(est[:, 0][None, :] - truth[:, 0][:, None])
    _, cols = linear_sum_assignment(cost)
    return cols


def run_trial(spec: SweepSpec, point: int, trial: int) -> Optional[np.ndarray]:
    """Squared normalized errors ``(L, 3)`` for one trial, or None on failure."""
    snr = spec.snr_db[point]
    cfg = spec.config.replace(snr_db=None if snr is None else float(snr))
    ss = trial_seed(spec.seed, point, trial)
    path_seed, offset_seed, noise_seed = ss.spawn(3)
    paths = random_paths(spec.scenario, np.random.default_rng(path_seed))
    offsets = generate_offsets(OffsetModel(kind=spec.offsets), cfg.packet_count,
                               seed=np.random.default_rng(offset_seed))
    Y = synthesize_csi(cfg, paths, offsets, noise_seed=np.random.default_rng(noise_seed))
    est = UplinkSensingEstimator(spec.scenario.n_dynamic, static_mode=spec.static_mode,
                                 static=static_component(paths, cfg))
    try:
        a = est.fit(Y).predict()
    except CsiRatioError:
        return None
    truth = np.array([[p.doppler, p.spatial_freq(cfg), p.delay] for p in paths.dynamic])
    a = a[match_paths(a, truth)]
    T = cfg.symbol_duration
    d_phi = np.angle(np.exp(1j * (a[:, 1] - truth[:, 1])))
    d_tau = (a[:, 2] - truth[:, 2] + T / 2) % T - T / 2
    err = np.column_stack([(a[:, 0] - truth[:, 0]) ** 2 / truth[:, 0] ** 2, d_phi ** 2 / np.pi ** 2,
                           d_tau ** 2 / np.maximum(truth[:, 2] ** 2, np.finfo(float).tiny)])
    return err if np.all(np.isfinite(err)) else None


def _records(spec, results) -> list[NmseRecord]:
    out = []
    for point, snr in enumerate(spec.snr_db):
        errs = [r for (pt, _), r in results if pt == point and r is not None]
        failures = sum(1 for (pt, _), r in results if pt == point and r is None)
        stacked = np.concatenate(errs) if errs else np.empty((0, 3))
        for k, kind in enumerate(KINDS):
            col = stacked[:, k]
            n = col.size
            nmse = float(col.mean()) if n else float("nan")
            ci = float(1.96 * col.std(ddof=1) / np.sqrt(n)) if n > 1 else float("nan")
            out.append(NmseRecord(kind, None if snr is None else float(snr), nmse, ci, spec.trials, failures))
    return out


def run_nmse_sweep(spec: SweepSpec, n_jobs: int = 1) -> list[NmseRecord]:
    """Per-SNR NMSE records for Doppler, AoA and delay.

    Every trial draws paths, offsets and noise from seeds derived from
    ``(spec.seed, point, trial)``, so the output does not depend on
    ``n_jobs`` or scheduling order.
    """
    from joblib import Parallel, delayed

    jobs = [(pt, t) for pt in range(len(spec.snr_db)) for t in range(spec.trials)]
    errs = Parallel(n_jobs=n_jobs)(delayed(run_trial)(spec, pt, t) for pt, t in jobs)
    return _records(spec, sorted(zip(jobs, errs), key=lambda x: x[0]))


def write_nmse_csv(records, path):
    return write_rows(path, ["kind", "snr_db", "nmse", "ci", "trials", "failures"], (r.row() for r in records))


def records_by_kind(records) -> dict:
    out = {}
    for r in records:
        out.setdefault(r.kind, []).append(asdict(r))
    return out
