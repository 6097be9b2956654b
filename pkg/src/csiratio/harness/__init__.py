"""Desk-scale experiment runners: Taylor convergence, NMSE sweeps, spectrum
shapes and trajectory smoothing.  Outputs are plot-ready CSVs plus a JSON
run manifest."""

from .convergence import ConvergenceGrid, convergence_cell, run_convergence_study
from .output import config_hash, write_manifest
from .spectra import SpectrumShapes, conventional_music_doppler, fig7_paths, run_spectrum_shapes
from .sweep import NmseRecord, SweepSpec, run_nmse_sweep, write_nmse_csv
from .trajectory import (DEFAULT_BASELINE, TrajectoryPoint, bistatic_range, circular_track, geometry_of, kalman_smooth,
                         trajectory_from_estimates, write_trajectory_csv)

__all__ = [
    "ConvergenceGrid", "DEFAULT_BASELINE", "NmseRecord", "SpectrumShapes", "SweepSpec", "TrajectoryPoint",
    "bistatic_range", "circular_track", "config_hash", "convergence_cell", "conventional_music_doppler", "fig7_paths",
    "geometry_of", "kalman_smooth", "run_convergence_study", "run_nmse_sweep", "run_spectrum_shapes",
    "trajectory_from_estimates", "write_manifest", "write_nmse_csv", "write_trajectory_csv",
]
