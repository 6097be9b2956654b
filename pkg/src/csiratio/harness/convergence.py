"""Monte-Carlo study of Taylor-series accuracy versus path counts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ratio import error_proportion
from ..signal_model import ScenarioSpec, SystemConfig, random_paths, synthesize_csi
from .output import write_rows


@dataclass
class ConvergenceGrid:
    """Cell averages indexed ``[i, j]`` for ``L_values[i]`` and ``Ls_values[j]``.

    ``error_proportion`` averages e_Tay over trials with at least one
    convergent sample; ``probability_ci`` is the 95 % half-width of the
    convergence probability.
    """

    L_values: np.ndarray
    Ls_values: np.ndarray
    error_proportion: np.ndarray
    convergence_probability: np.ndarray
    divergent_fraction: np.ndarray
    probability_ci: np.ndarray
    trials: int
    p: int

    def cell(self, L: int, Ls: int) -> dict:
        i = int(np.flatnonzero(self.L_values == L)[0])
        j = int(np.flatnonzero(self.Ls_values == Ls)[0])
        return {"L": L, "L_S": Ls, "e_tay": float(self.error_proportion[i, j]),
                "convergence_probability": float(self.convergence_probability[i, j]),
                "divergent_fraction": float(self.divergent_fraction[i, j]),
                "ci": float(self.probability_ci[i, j])}

    def rows(self):
        for L in self.L_values:
            for Ls in self.Ls_values:
                c = self.cell(int(L), int(Ls))
                yield [c["L"], c["L_S"], c["e_tay"], c["convergence_probability"], c["divergent_fraction"],
                       c["ci"], self.trials]

    def to_csv(self, path):
        return write_rows(path, ["L", "L_S", "e_tay", "convergence_probability", "divergent_fraction", "ci",
                                 "trials"], self.rows())


def convergence_cell(L: int, Ls: int, trials: int, seed: int, *, p: int = 2, q: int = 1, los: bool = False,
                     los_advantage_db: float = 10.0, config: SystemConfig | None = None) -> dict:
    """Trial statistics for one ``(L, L_S)`` cell.

    The generator is seeded from ``(seed, L, L_S)`` so a cell gives the same
    numbers whether it runs alone or inside a grid.
    """
    config = (config or SystemConfig()).replace(snr_db=None)
    if L == 0:
        return {"e_tay": 0.0, "probability": 1.0, "divergent": 0.0, "ci": 0.0}
    rng = np.random.default_rng(np.random.SeedSequence([seed, L, Ls]))
    spec = ScenarioSpec(n_dynamic=L, n_static=Ls, los=los, los_advantage_db=los_advantage_db)
    e, prob = [], []
    for _ in range(trials):
        paths = random_paths(spec, rng)
        d = error_proportion(synthesize_csi(config, paths), paths, config, p=p, q=q)
        prob.append(d.convergence_probability)
        if np.isfinite(d.error_proportion):
            e.append(d.error_proportion)
    prob = np.asarray(prob)
    ci = 1.96 * prob.std(ddof=1) / np.sqrt(trials) if trials > 1 else float("nan")
    return {"e_tay": float(np.mean(e)) if e else float("nan"), "probability": float(prob.mean()),
            "divergent": float(1 - prob.mean()), "ci": float(ci)}


def run_convergence_study(L_values=range(0, 6), Ls_values=range(1, 11), trials: int = 100, seed: int = 0, *,
                          p: int = 2, q: int = 1, los: bool = False, los_advantage_db: float = 10.0,
                          config: SystemConfig | None = None, n_jobs: int = 1) -> ConvergenceGrid:
    """e_Tay and convergence probability over an ``L × L_S`` grid (noiseless, zero offsets)."""
    from joblib import Parallel, delayed

    L_values = np.asarray(list(L_values), dtype=int)
    Ls_values = np.asarray(list(Ls_values), dtype=int)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if np.any(Ls_values < 1):
        raise ValueError("L_S values must be >= 1")
    cells = [(int(L), int(Ls)) for L in L_values for Ls in Ls_values]
    out = Parallel(n_jobs=n_jobs)(
        delayed(convergence_cell)(L, Ls, trials, seed, p=p, q=q, los=los, los_advantage_db=los_advantage_db,
                                  config=config)
        for L, Ls in cells
    )
    shape = (L_values.size, Ls_values.size)

    def pick(key):
        return np.array([c[key] for c in out]).reshape(shape)

    return ConvergenceGrid(L_values, Ls_values, pick("e_tay"), pick("probability"), pick("divergent"),
                           pick("ci"), trials, p)
