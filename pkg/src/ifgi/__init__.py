"""Thermal interaction-free ghost imaging: chain optics, closed forms and Monte Carlo."""

from .analytics import (
    Contrasts,
    ExperimentBudget,
    bucket_means,
    cnr_exact,
    cnr_large_k,
    cnr_ratio,
    contrasts,
    equal_absorption_measurements,
    expected_image_levels,
    optimize_gamma0,
    total_absorption,
    visibility,
)
from .chain import (
    ChainParams,
    PathAmplitudes,
    TransferCoefficients,
    absorption_weight,
    compute_transfer,
    cycle_step,
    transfer_grid,
)
from .montecarlo import CnrReport, GhostImage, ShotAccumulator, SimConfig, empirical_cnr, finalize, run_simulation
from .sample import BinarySample, from_grid, load_mask, save_mask, synthesize

__version__ = "0.1.0"
