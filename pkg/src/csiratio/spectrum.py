"""Pseudo-spectrum containers and MUSIC scoring shared by the estimators."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np


@dataclass
class SpectrumTrace:
    """A pseudo-spectrum sampled on a grid, exportable as CSV.

    ``columns`` maps extra CSV column names to arrays aligned with ``grid``
    (e.g. ``theta_deg`` next to ``phi_rad``).
    """

    grid: np.ndarray
    values: np.ndarray
    grid_name: str = "f_hz"
    columns: dict = field(default_factory=dict)
    cost: np.ndarray | None = None

    def to_csv(self, path):
        path = FsPath(path)
        names = [self.grid_name, *self.columns, "spectrum_value"]
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(names)
            extra = list(self.columns.values())
            for i, x in enumerate(self.grid):
                writer.writerow([repr(float(x)), *(repr(float(c[i])) for c in extra),
                                 repr(float(self.values[i]))])
        return path

    def value_at(self, x: float) -> float:
        return float(self.values[int(np.argmin(np.abs(self.grid - x)))])


def music_cost(bases, null_basis: np.ndarray) -> np.ndarray:
    """``||[B_1, ..., B_J]^H N||_F^2`` evaluated column-wise.

    Each element of ``bases`` is a ``(dim, K)`` matrix of unit-norm basis
    vectors, one column per grid candidate.
    """
    if null_basis.shape[1] == 0:
        return np.zeros(bases[0].shape[1])
    cost = np.zeros(bases[0].shape[1])
    for B in bases:
        proj = null_basis.conj().T @ B
        cost += np.sum(np.abs(proj) ** 2, axis=0)
    return cost


def music_spectrum(cost: np.ndarray) -> np.ndarray:
    tiny = np.finfo(float).tiny
    return 1.0 / np.maximum(cost, tiny)
