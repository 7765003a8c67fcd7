"""Parameter sweeps behind the CNR-ratio, bucket-intensity and visibility maps,
plus a harness that checks the Monte Carlo against the closed forms.

Every sweep is a pure function of its :class:`SweepSpec` and returns a
:class:`pandas.DataFrame` whose row order is fixed by the outer loops
(M, then alpha or detector, then the loss grids).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Literal, Optional, Sequence

import numpy as np
import pandas as pd

from . import analytics
from ._io import atomic_write_text
from .analytics import ExperimentBudget, bucket_means, cnr_exact, contrasts, expected_image_levels
from .chain import ChainParams, compute_transfer, transfer_grid
from .montecarlo import SimConfig, run_simulation
from .sample import synthesize

Figure = Literal["fig2", "fig3", "fig4", "fig5"]

# Bucket photons per shot in the reference single-pass experiment.
REFERENCE_BUCKET_PHOTONS = 3.9e9
CONTOUR_LEVELS = (1e-2, 1e-4, 1e-6)
LOW_VISIBILITY = 0.5

FIG3_PANELS = ((5, 0.25), (10, 0.25), (5, 1.0), (10, 1.0), (5, 4.0), (10, 4.0))

COLUMNS = {
    "fig2": ["M", "alpha", "gamma1", "gamma0", "cnr_ratio"],
    "fig3": ["M", "alpha", "gamma0", "gamma1", "K_over_Kprime", "cnr_ratio", "no_advantage", "min_bucket_ratio"],
    "fig4": ["M", "i", "gamma0", "gamma1", "ratio", "bucket_photons"]
    + [f"below_{lvl:.0e}" for lvl in CONTOUR_LEVELS],
    "fig5": ["M", "gamma0", "gamma1", "visibility", "low_visibility"],
}


def gamma_grid(count: int = 101, lo: float = 0.0, hi: float = 0.99) -> list[float]:
    if count < 2:
        raise ValueError("grid count must be >= 2")
    if not 0.0 <= lo < hi < 1.0:
        raise ValueError("grid range must satisfy 0 <= lo < hi < 1")
    return [float(g) for g in np.linspace(lo, hi, count)]


@dataclass
class SweepSpec:
    """Inputs for one figure sweep.

    ``gamma1`` is a grid for the 2-D maps and the list of curves for fig2.
    ``J_p`` only matters with ``large_k=False``; opaque counts are
    ``alpha * J_p``.
    """

    figure: Figure
    M_values: Sequence[int] = (5, 10)
    alpha_values: Sequence[float] = (1.0,)
    gamma0: Sequence[float] = field(default_factory=gamma_grid)
    gamma1: Sequence[float] = field(default_factory=gamma_grid)
    K_prime: int = 10**6
    J_p: int = 10**4
    large_k: bool = True
    panels: Optional[Sequence[tuple[int, float]]] = None

    def __post_init__(self):
        if self.figure not in COLUMNS:
            raise ValueError(f"unknown figure {self.figure!r}")
        self.M_values = [int(m) for m in self.M_values]
        self.alpha_values = [float(a) for a in self.alpha_values]
        self.gamma0 = [float(g) for g in self.gamma0]
        self.gamma1 = [float(g) for g in self.gamma1]
        if len(self.gamma0) < 2:
            raise ValueError("gamma0 grid needs at least 2 points")
        if self.figure != "fig2" and len(self.gamma1) < 2:
            raise ValueError("gamma1 grid needs at least 2 points")
        for g in self.gamma0 + self.gamma1:
            if not 0.0 <= g < 1.0:
                raise ValueError(f"loss values must lie in [0, 1), got {g}")
        for m in self.M_values:
            ChainParams(m)
        if any(a < 0 for a in self.alpha_values):
            raise ValueError("alpha values must be >= 0")
        if self.panels is not None:
            self.panels = [(int(m), float(a)) for m, a in self.panels]

    @classmethod
    def figure_default(cls, figure: Figure) -> "SweepSpec":
        if figure == "fig2":
            return cls("fig2", M_values=(10,), alpha_values=(1.0, 4.0), gamma1=(0.0, 0.1, 0.2, 0.4))
        if figure == "fig3":
            return cls("fig3", panels=FIG3_PANELS)
        return cls(figure)

    def to_dict(self) -> dict:
        return asdict(self)


def _grid(spec: SweepSpec):
    g0, g1 = np.meshgrid(np.array(spec.gamma0), np.array(spec.gamma1), indexing="ij")
    return g0, g1


def sweep_fixed_k(spec: SweepSpec) -> pd.DataFrame:
    """CNR ratio at equal shot count, one curve per (M, alpha, gamma1)."""
    g0 = np.array(spec.gamma0)
    frames = []
    for M in spec.M_values:
        for alpha in spec.alpha_values:
            for g1 in spec.gamma1:
                tc = transfer_grid(M, g0, g1)
                ratio = analytics.cnr_ratio_from_transfer(
                    tc, spec.J_p, alpha * spec.J_p, spec.K_prime, "fixed_K", spec.large_k
                )
                frames.append(
                    pd.DataFrame({"M": M, "alpha": alpha, "gamma1": g1, "gamma0": g0, "cnr_ratio": ratio})
                )
    return pd.concat(frames, ignore_index=True)[COLUMNS["fig2"]]


def _bucket_ratios(tc, alpha):
    """``<I_i> / <I'_0>`` for both buckets, i.e. ``|chi_pi|^2 + alpha |chi_bi|^2``."""
    r0 = np.abs(tc.chi_p0) ** 2 + alpha * np.abs(tc.chi_b0) ** 2
    r1 = np.abs(tc.chi_p1) ** 2 + alpha * np.abs(tc.chi_b1) ** 2
    return r0, r1


def sweep_fixed_absorption(spec: SweepSpec) -> pd.DataFrame:
    """CNR ratio when both schemes deposit the same dose in the sample.

    ``no_advantage`` flags cells with ratio <= 1. ``min_bucket_ratio`` is the
    dimmer bucket's photon number relative to the single-pass bucket, for
    judging where detection shot noise stops being negligible.
    """
    panels = spec.panels or [(m, a) for m in spec.M_values for a in spec.alpha_values]
    g0, g1 = _grid(spec)
    frames = []
    for M, alpha in panels:
        tc = transfer_grid(M, g0, g1)
        ratio = analytics.cnr_ratio_from_transfer(
            tc, spec.J_p, alpha * spec.J_p, spec.K_prime, "fixed_absorption", spec.large_k
        )
        K = np.maximum(1, np.floor(spec.K_prime / tc.absorption_weight))
        r0, r1 = _bucket_ratios(tc, alpha)
        frames.append(
            pd.DataFrame(
                {
                    "M": M,
                    "alpha": alpha,
                    "gamma0": g0.ravel(),
                    "gamma1": g1.ravel(),
                    "K_over_Kprime": (K / spec.K_prime).ravel(),
                    "cnr_ratio": ratio.ravel(),
                    "no_advantage": (ratio <= 1.0).ravel(),
                    "min_bucket_ratio": np.minimum(r0, r1).ravel(),
                }
            )
        )
    return pd.concat(frames, ignore_index=True)[COLUMNS["fig3"]]


def sweep_bucket_intensity(spec: SweepSpec) -> pd.DataFrame:
    """Photons per shot at D_0 and D_1 relative to the single-pass bucket."""
    alpha = spec.alpha_values[0]
    g0, g1 = _grid(spec)
    frames = []
    for M in spec.M_values:
        tc = transfer_grid(M, g0, g1)
        for i, ratio in enumerate(_bucket_ratios(tc, alpha)):
            cols = {
                "M": M,
                "i": i,
                "gamma0": g0.ravel(),
                "gamma1": g1.ravel(),
                "ratio": ratio.ravel(),
                "bucket_photons": (ratio * REFERENCE_BUCKET_PHOTONS).ravel(),
            }
            for lvl in CONTOUR_LEVELS:
                cols[f"below_{lvl:.0e}"] = (ratio < lvl).ravel()
            frames.append(pd.DataFrame(cols))
    return pd.concat(frames, ignore_index=True)[COLUMNS["fig4"]]


def sweep_visibility(spec: SweepSpec) -> pd.DataFrame:
    g0, g1 = _grid(spec)
    frames = []
    for M in spec.M_values:
        vis = analytics.visibility(transfer_grid(M, g0, g1))
        frames.append(
            pd.DataFrame(
                {
                    "M": M,
                    "gamma0": g0.ravel(),
                    "gamma1": g1.ravel(),
                    "visibility": vis.ravel(),
                    "low_visibility": (vis < LOW_VISIBILITY).ravel(),
                }
            )
        )
    return pd.concat(frames, ignore_index=True)[COLUMNS["fig5"]]


SWEEPS = {
    "fig2": sweep_fixed_k,
    "fig3": sweep_fixed_absorption,
    "fig4": sweep_bucket_intensity,
    "fig5": sweep_visibility,
}


def run_sweep(spec: SweepSpec) -> pd.DataFrame:
    return SWEEPS[spec.figure](spec)


def write_sweep(spec: SweepSpec, out_dir, table: Optional[pd.DataFrame] = None) -> tuple[Path, Path]:
    """Write ``<figure>.csv`` and ``<figure>_manifest.json`` into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table = run_sweep(spec) if table is None else table
    csv_path = out_dir / f"{spec.figure}.csv"
    manifest_path = out_dir / f"{spec.figure}_manifest.json"
    atomic_write_text(csv_path, table.to_csv(index=False, lineterminator="\n"))
    manifest = {"spec": spec.to_dict(), "columns": list(table.columns), "rows": len(table)}
    atomic_write_text(manifest_path, json.dumps(manifest, indent=2) + "\n")
    return csv_path, manifest_path


# ---------------------------------------------------------------------------
# Monte Carlo validation harness


@dataclass(frozen=True)
class ValidationPoint:
    chain: ChainParams
    alpha: float = 1.0
    K: int = 10_000
    u: float = 100.0
    seed_count: int = 20
    width: int = 32
    height: int = 32
    detector_mode: str = "continuous"

    def sample(self):
        if self.alpha == 1.0:
            return synthesize("checkerboard", self.width, self.height)
        return synthesize("random", self.width, self.height, self.alpha, seed=0)


@dataclass(frozen=True)
class Tolerances:
    cnr_per_seed: tuple[float, float] = (0.85, 1.15)
    cnr_ensemble: float = 0.05
    class_mean: float = 0.05
    bucket_mean: float = 0.02
    bucket_diff_sigma: float = 3.0


def _rel_err(measured: float, expected: float, scale: float) -> float:
    """Relative error, falling back to ``scale`` when the expectation is
    negligible next to it (e.g. round-off residue of an exact zero)."""
    ref = abs(expected) if abs(expected) > 1e-9 * scale else scale
    return abs(measured - expected) / ref


def validate_point(point: ValidationPoint, tol: Tolerances = Tolerances(), threads: int = 1) -> dict:
    sample = point.sample()
    tc = compute_transfer(point.chain)
    c = contrasts(tc)
    budget = ExperimentBudget(point.K, point.u, sample.J_p, sample.J_b)
    exp_Gp, exp_Gb = (float(v) for v in expected_image_levels(c, budget))
    cnr_an = float(cnr_exact(c, budget))
    I0_an, I1_an, diff_an = (float(v) for v in bucket_means(tc, budget))

    ratios, Gp, Gb, I0, I1, z_diff, images = [], [], [], [], [], [], []
    for seed in range(point.seed_count):
        cfg = SimConfig(point.chain, sample, point.K, point.u, seed, point.detector_mode)
        img, rep = run_simulation(cfg, threads=threads)
        ratios.append(rep.cnr_empirical / cnr_an)
        Gp.append(rep.mean_Gp)
        Gb.append(rep.mean_Gb)
        I0.append(float(img.bucket_mean[0]))
        I1.append(float(img.bucket_mean[1]))
        diff = I1[-1] - I0[-1]
        z_diff.append((diff - diff_an) / img.bucket_diff_sem if img.bucket_diff_sem > 0 else 0.0)
        images.append(img.G)

    contrast_scale = abs(exp_Gp - exp_Gb)
    bucket_scale = I0_an + I1_an
    result = {
        "M": point.chain.M,
        "gamma0": point.chain.gamma0,
        "gamma1": point.chain.gamma1,
        "alpha": sample.alpha,
        "K": point.K,
        "u": point.u,
        "seeds": point.seed_count,
        "cnr_exact": cnr_an,
        "cnr_ratio_mean": float(np.mean(ratios)),
        "cnr_ratio_std": float(np.std(ratios, ddof=1)) if len(ratios) > 1 else math.nan,
        "cnr_ratio_min": float(np.min(ratios)),
        "cnr_ratio_max": float(np.max(ratios)),
        "expected_Gp": exp_Gp,
        "expected_Gb": exp_Gb,
        "mean_Gp": float(np.mean(Gp)),
        "mean_Gb": float(np.mean(Gb)),
        "Gp_error": _rel_err(float(np.mean(Gp)), exp_Gp, contrast_scale),
        "Gb_error": _rel_err(float(np.mean(Gb)), exp_Gb, contrast_scale),
        "bucket_expected": [I0_an, I1_an],
        "bucket_measured": [float(np.mean(I0)), float(np.mean(I1))],
        "bucket_error": max(
            _rel_err(float(np.mean(I0)), I0_an, bucket_scale),
            _rel_err(float(np.mean(I1)), I1_an, bucket_scale),
        ),
        "bucket_diff_expected": diff_an,
        "bucket_diff_z": [float(z) for z in z_diff],
    }
    if point.seed_count >= 2:
        # alternative noise estimator: per-pixel spread across independent runs
        stack = np.array(images)
        per_pixel_var = stack.var(axis=0, ddof=1)
        opaque = sample.opaque
        result["cnr_ensemble"] = float(
            (stack[:, ~opaque].mean() - stack[:, opaque].mean())
            / math.sqrt(0.5 * (per_pixel_var[~opaque].mean() + per_pixel_var[opaque].mean()))
        )
    lo, hi = tol.cnr_per_seed
    checks = {
        "cnr_per_seed": all(lo <= r <= hi for r in ratios),
        "cnr_ensemble_mean": abs(result["cnr_ratio_mean"] - 1.0) <= tol.cnr_ensemble,
        "class_means": max(result["Gp_error"], result["Gb_error"]) <= tol.class_mean,
        "bucket_means": result["bucket_error"] <= tol.bucket_mean,
        "bucket_difference": all(abs(z) <= tol.bucket_diff_sigma for z in z_diff),
    }
    result["checks"] = checks
    result["passed"] = all(checks.values())
    return result


def validate_montecarlo(
    points: Sequence[ValidationPoint], tol: Tolerances = Tolerances(), threads: int = 1
) -> list[dict]:
    """Run every point and report empirical-vs-analytic agreement with pass/fail flags."""
    return [validate_point(p, tol, threads) for p in points]
