"""Uplink sensing toolkit built on the CSI ratio.

Synthesizes asynchronous multi-antenna OFDM channel state information and
recovers Doppler, angle of arrival and delay of dynamic paths.
"""

from .aoa import AoaEstimator, default_phi_grid, music_aoa, phi_to_theta, trivial_solution_guard
from .delay import DelayEstimator, joint_single_path, multi_delay_ls, pair_doppler_aoa
from .doppler import DopplerConfig, DopplerEstimator, default_doppler_grid, music_doppler, stack_dcsir
from .exceptions import (CsiRatioError, DegenerateDenominatorError, EstimationError, FormatError,
                         IdentifiabilityWarning, IllConditionedError, InsufficientPeaksError,
                         InvalidConfigError, RankDeficiencyError, ZeroBasisError)
from .pipeline import EstimateSet, PathEstimate, UplinkSensingEstimator
from .ratio import (csi_ratio, d_csir, error_proportion, taylor_deriv_1, taylor_deriv_2, taylor_deriv_k)
from .signal_model import (CsiTensor, OffsetModel, OffsetTrace, Path, PathSet, ScenarioSpec, SystemConfig,
                           generate_offsets, random_paths, synthesize_csi)

__version__ = "0.1.0"

__all__ = [
    "AoaEstimator", "CsiRatioError", "CsiTensor", "DegenerateDenominatorError", "DelayEstimator",
    "DopplerConfig", "DopplerEstimator", "EstimateSet", "EstimationError", "FormatError",
    "IdentifiabilityWarning", "IllConditionedError", "InsufficientPeaksError", "InvalidConfigError",
    "OffsetModel", "OffsetTrace", "Path", "PathEstimate", "PathSet", "RankDeficiencyError", "ScenarioSpec",
    "SystemConfig", "UplinkSensingEstimator", "ZeroBasisError", "csi_ratio", "d_csir", "default_doppler_grid",
    "default_phi_grid", "error_proportion", "generate_offsets", "joint_single_path", "multi_delay_ls",
    "music_aoa", "music_doppler", "pair_doppler_aoa", "phi_to_theta", "random_paths", "stack_dcsir",
    "synthesize_csi", "taylor_deriv_1", "taylor_deriv_2", "taylor_deriv_k", "trivial_solution_guard",
]
