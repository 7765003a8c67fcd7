"""Seeded Monte Carlo of the differential thermal ghost-imaging measurement.

Each shot draws one circular complex Gaussian amplitude per pixel (one
speckle per pixel) with ``<|a|^2> = 2u``. The two CCDs each see ``|a|^2 / 4``;
bucket ``D_i`` integrates ``|chi_i(x)|^2 |a(x)|^2 / 2`` over the sample.
Coincidences are accumulated as running sums and reduced to the
background-subtracted covariance images ``g_0``, ``g_1`` and ``G = g_1 - g_0``.

Randomness is counter based (numpy's Philox): the field of shot ``k`` occupies
a fixed block of the stream keyed by ``seed``, so any partition of the shot
range produces the same shots. Poisson detector noise uses a second key.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Literal, Optional

import numpy as np

from ._io import atomic_write_text
from .analytics import ExperimentBudget, cnr_exact, contrasts, expected_image_levels, visibility
from .chain import ChainParams, TransferCoefficients, compute_transfer
from .errors import ClassTooSmall, NotEnoughShots, ShapeMismatch
from .sample import BinarySample

DetectorMode = Literal["continuous", "poisson"]

CHUNK_SHOTS = 256
_MASK64 = (1 << 64) - 1
_FIELD_STREAM = 0
_POISSON_STREAM = 1


def _philox(seed: int, stream: int, counter: int) -> np.random.Philox:
    key = np.array([seed & _MASK64, stream], dtype=np.uint64)
    ctr = np.array(
        [counter & _MASK64, (counter >> 64) & _MASK64, (counter >> 128) & _MASK64, counter >> 192],
        dtype=np.uint64,
    )
    return np.random.Philox(key=key, counter=ctr)


def _shot_uniforms(seed: int, first_shot: int, n_shots: int, J: int):
    blocks = -(-2 * J // 4)
    words = 4 * blocks
    raw = _philox(seed, _FIELD_STREAM, first_shot * blocks).random_raw(n_shots * words)
    raw = raw.reshape(n_shots, words)[:, : 2 * J]
    unif = (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53
    return 1.0 - unif[:, 0::2], unif[:, 1::2]  # (0, 1] and [0, 1)


def shot_fields(seed: int, first_shot: int, n_shots: int, J: int, u: float) -> np.ndarray:
    """Complex speckle amplitudes for shots ``first_shot .. first_shot + n_shots - 1``.

    Shape ``(n_shots, J)``. Pixel ``j`` of shot ``k`` is built by Box-Muller from
    raw words ``2j`` and ``2j + 1`` of that shot's Philox block, so the value
    depends only on ``(seed, k, j)``.
    """
    if not u > 0:
        raise ValueError("u must be > 0")
    u1, u2 = _shot_uniforms(seed, first_shot, n_shots, J)
    radius = np.sqrt(-2.0 * u * np.log(u1))
    phase = 2.0 * np.pi * u2
    return radius * np.cos(phase) + 1j * radius * np.sin(phase)


def shot_intensities(seed: int, first_shot: int, n_shots: int, J: int, u: float) -> np.ndarray:
    """``|a|^2`` of :func:`shot_fields` (equal up to rounding), without the phase."""
    if not u > 0:
        raise ValueError("u must be > 0")
    u1, _ = _shot_uniforms(seed, first_shot, n_shots, J)
    return -2.0 * u * np.log(u1)


def generate_shot(seed: int, shot_index: int, u: float, J: int) -> np.ndarray:
    return shot_fields(seed, shot_index, 1, J, u)[0]


@dataclass(frozen=True)
class ShotReadout:
    """Bucket and CCD photon numbers for one shot, or a batch along axis 0."""

    I0: np.ndarray
    I1: np.ndarray
    Ic0: np.ndarray
    Ic1: np.ndarray


def bucket_weights(sample: BinarySample, tc: TransferCoefficients) -> np.ndarray:
    """Per-pixel weights ``|chi_i(x)|^2 / 2`` for both buckets, shape ``(2, J)``."""
    opaque = sample.opaque
    w = np.empty((2, sample.J))
    w[0] = np.where(opaque, abs(tc.chi_b0) ** 2, abs(tc.chi_p0) ** 2) / 2
    w[1] = np.where(opaque, abs(tc.chi_b1) ** 2, abs(tc.chi_p1) ** 2) / 2
    return w


def _poisson_rng(seed: int, shot_index: int) -> np.random.Generator:
    return np.random.Generator(_philox(seed, _POISSON_STREAM, shot_index << 192))


def detector_readout(
    field: np.ndarray,
    sample: BinarySample,
    tc: TransferCoefficients,
    mode: DetectorMode = "continuous",
    seed: int = 0,
    first_shot: int = 0,
) -> ShotReadout:
    """Detector photon numbers for one field (``(J,)``) or a batch (``(B, J)``).

    In ``poisson`` mode every reading is replaced by a Poisson count with the
    continuous value as mean; the counts for shot ``k`` are keyed by
    ``(seed, first_shot + k)``.
    """
    field = np.asarray(field)
    return readout_from_intensity(field.real**2 + field.imag**2, sample, tc, mode, seed, first_shot)


def readout_from_intensity(
    intensity: np.ndarray,
    sample: BinarySample,
    tc: TransferCoefficients,
    mode: DetectorMode = "continuous",
    seed: int = 0,
    first_shot: int = 0,
) -> ShotReadout:
    """:func:`detector_readout` for precomputed source intensities ``|a(x)|^2``."""
    if intensity.ndim not in (1, 2) or intensity.shape[-1] != sample.J:
        raise ShapeMismatch(f"field has shape {intensity.shape}, sample has J={sample.J}")
    w = bucket_weights(sample, tc)
    # explicit product + sum instead of BLAS matmul keeps reductions bit-reproducible
    buckets = (intensity[..., None, :] * w).sum(axis=-1)  # (..., 2)
    ccd = intensity / 4.0
    if mode == "continuous":
        return ShotReadout(buckets[..., 0], buckets[..., 1], ccd, ccd)
    if mode != "poisson":
        raise ValueError(f"unknown detector mode {mode!r}")
    batch = intensity.ndim == 2
    buckets = np.atleast_2d(buckets)
    ccd = np.atleast_2d(ccd)
    I = np.empty_like(buckets)
    Ic = np.empty((2,) + ccd.shape)
    for k in range(ccd.shape[0]):
        rng = _poisson_rng(seed, first_shot + k)
        I[k] = rng.poisson(buckets[k])
        Ic[0, k] = rng.poisson(ccd[k])
        Ic[1, k] = rng.poisson(ccd[k])
    if not batch:
        return ShotReadout(I[0, 0], I[0, 1], Ic[0, 0], Ic[1, 0])
    return ShotReadout(I[:, 0], I[:, 1], Ic[0], Ic[1])


def _neumaier(hi, lo, value):
    t = hi + value
    big = np.abs(hi) >= np.abs(value)
    lo = lo + np.where(big, (hi - t) + value, (value - t) + hi)
    return t, lo


@dataclass
class ShotAccumulator:
    """Running, compensated sums over shots.

    Holds ``sum I_i``, ``sum I_i Ic_i(x)``, ``sum Ic_i(x)`` for both channels and
    ``sum (I_1 - I_0)^2`` for the bucket-difference standard error.
    """

    J: int
    n: int = 0
    _hi: dict = field(default_factory=dict, repr=False)
    _lo: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        shapes = {"I": (2,), "IIc": (2, self.J), "Ic": (2, self.J), "dI2": ()}
        for name, shape in shapes.items():
            self._hi.setdefault(name, np.zeros(shape))
            self._lo.setdefault(name, np.zeros(shape))

    def _add(self, name, value):
        self._hi[name], self._lo[name] = _neumaier(self._hi[name], self._lo[name], value)

    def sum(self, name: str) -> np.ndarray:
        return self._hi[name] + self._lo[name]

    def accumulate(self, r: ShotReadout) -> "ShotAccumulator":
        """Add one shot or a batch of shots in place; returns ``self``."""
        I = np.stack([np.atleast_1d(r.I0), np.atleast_1d(r.I1)], axis=1)  # (B, 2)
        Ic = np.stack([np.atleast_2d(r.Ic0), np.atleast_2d(r.Ic1)], axis=1)  # (B, 2, J)
        if Ic.shape[-1] != self.J or Ic.shape[0] != I.shape[0]:
            raise ShapeMismatch(f"readout has J={Ic.shape[-1]}, accumulator J={self.J}")
        self._add("I", I.sum(axis=0))
        self._add("IIc", (I[:, :, None] * Ic).sum(axis=0))
        self._add("Ic", Ic.sum(axis=0))
        self._add("dI2", np.square(I[:, 1] - I[:, 0]).sum())
        self.n += I.shape[0]
        return self

    def merge(self, other: "ShotAccumulator") -> "ShotAccumulator":
        if other.J != self.J:
            raise ShapeMismatch(f"cannot merge J={self.J} with J={other.J}")
        out = ShotAccumulator(self.J, self.n + other.n)
        for name in self._hi:
            hi, lo = _neumaier(self._hi[name], self._lo[name], other._hi[name])
            out._hi[name], out._lo[name] = _neumaier(hi, lo, other._lo[name])
        return out


def merge(a: ShotAccumulator, b: ShotAccumulator) -> ShotAccumulator:
    return a.merge(b)


@dataclass(frozen=True, eq=False)
class GhostImage:
    g0: np.ndarray
    g1: np.ndarray
    G: np.ndarray
    K: int
    bucket_mean: np.ndarray
    bucket_diff_sem: float
    u: Optional[float] = None
    chain: Optional[ChainParams] = None
    sample: Optional[BinarySample] = None

    def as_grid(self, values: Optional[np.ndarray] = None) -> np.ndarray:
        if self.sample is None:
            raise ValueError("image has no sample geometry")
        return np.reshape(self.G if values is None else values, self.sample.mask.shape)

    def to_csv(self, path) -> None:
        if self.sample is None:
            raise ValueError("image has no sample geometry")
        h, w = self.sample.mask.shape
        yy, xx = np.indices((h, w))
        lines = ["x,y,g0,g1,G"]
        for x, y, a, b, c in zip(xx.ravel(), yy.ravel(), self.g0, self.g1, self.G):
            lines.append(f"{x},{y},{float(a)!r},{float(b)!r},{float(c)!r}")
        atomic_write_text(path, "\n".join(lines) + "\n")

    def to_pgm(self, path) -> None:
        """Plain PGM (P2, maxval 65535) of G, min-max normalised."""
        grid = self.as_grid()
        lo, hi = float(grid.min()), float(grid.max())
        scaled = np.zeros(grid.shape, dtype=np.int64)
        if hi > lo:
            scaled = np.rint((grid - lo) / (hi - lo) * 65535).astype(np.int64)
        rows = [" ".join(str(v) for v in row) for row in scaled]
        text = f"P2\n{grid.shape[1]} {grid.shape[0]}\n65535\n" + "\n".join(rows) + "\n"
        atomic_write_text(path, text)


def finalize(
    acc: ShotAccumulator,
    *,
    u: Optional[float] = None,
    chain: Optional[ChainParams] = None,
    sample: Optional[BinarySample] = None,
) -> GhostImage:
    """Background-subtracted images ``g_i = E[I_i Ic_i] - E[I_i] E[Ic_i]``."""
    if acc.n < 2:
        raise NotEnoughShots(f"need at least 2 shots, have {acc.n}")
    n = acc.n
    mean_I = acc.sum("I") / n
    g = acc.sum("IIc") / n - mean_I[:, None] * (acc.sum("Ic") / n)
    diff_mean = mean_I[1] - mean_I[0]
    var = max(float(acc.sum("dI2")) / n - diff_mean**2, 0.0) * n / (n - 1)
    return GhostImage(
        g0=g[0],
        g1=g[1],
        G=g[1] - g[0],
        K=n,
        bucket_mean=mean_I,
        bucket_diff_sem=math.sqrt(var / n),
        u=u,
        chain=chain,
        sample=sample,
    )


@dataclass(frozen=True)
class CnrReport:
    mean_Gp: float
    mean_Gb: float
    var_Gp: float
    var_Gb: float
    cnr_empirical: float
    cnr_analytic: float
    visibility_empirical: float
    visibility_analytic: float
    expected_Gp: float = math.nan
    expected_Gb: float = math.nan

    def to_dict(self) -> dict:
        return asdict(self)


def empirical_cnr(img: GhostImage, sample: BinarySample) -> CnrReport:
    """Class means and pixel-to-pixel variances of G, with the analytic counterparts.

    Analytic fields are ``nan`` when the image carries no chain or ``u``.
    """
    if img.G.shape != (sample.J,):
        raise ShapeMismatch(f"image has {img.G.size} pixels, sample has {sample.J}")
    if sample.J_p < 2 or sample.J_b < 2:
        raise ClassTooSmall(f"need >= 2 pixels per class, have J_p={sample.J_p}, J_b={sample.J_b}")
    opaque = sample.opaque
    Gp, Gb = img.G[~opaque], img.G[opaque]
    mean_Gp, mean_Gb = float(Gp.mean()), float(Gb.mean())
    var_Gp, var_Gb = float(Gp.var(ddof=1)), float(Gb.var(ddof=1))
    cnr_emp = (mean_Gp - mean_Gb) / math.sqrt(0.5 * (var_Gp + var_Gb))
    signal_sum = sum(float(g[m].mean()) for g in (img.g0, img.g1) for m in (~opaque, opaque))
    vis_emp = abs(mean_Gp - mean_Gb) / signal_sum if signal_sum else math.nan

    cnr_an = vis_an = exp_p = exp_b = math.nan
    if img.chain is not None:
        tc = compute_transfer(img.chain)
        c = contrasts(tc)
        vis_an = float(visibility(tc))
        budget = ExperimentBudget(img.K, img.u if img.u else 1.0, sample.J_p, sample.J_b)
        cnr_an = float(cnr_exact(c, budget))
        if img.u:
            exp_p, exp_b = (float(v) for v in expected_image_levels(c, budget))
    return CnrReport(
        mean_Gp=mean_Gp,
        mean_Gb=mean_Gb,
        var_Gp=var_Gp,
        var_Gb=var_Gb,
        cnr_empirical=cnr_emp,
        cnr_analytic=cnr_an,
        visibility_empirical=vis_emp,
        visibility_analytic=vis_an,
        expected_Gp=exp_p,
        expected_Gb=exp_b,
    )


@dataclass(frozen=True)
class SimConfig:
    chain: ChainParams
    sample: BinarySample
    K: int
    u: float = 100.0
    seed: int = 0
    detector_mode: DetectorMode = "continuous"

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 2:
            raise ValueError(f"K must be an integer >= 2, got {self.K!r}")
        if not self.u > 0:
            raise ValueError(f"u must be > 0, got {self.u!r}")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.detector_mode not in ("continuous", "poisson"):
            raise ValueError(f"unknown detector mode {self.detector_mode!r}")

    def to_dict(self) -> dict:
        return {
            "chain": {"M": self.chain.M, "gamma0": self.chain.gamma0, "gamma1": self.chain.gamma1},
            "sample": {
                "width": self.sample.width,
                "height": self.sample.height,
                "J_p": self.sample.J_p,
                "J_b": self.sample.J_b,
                "mask": ["".join("1" if b else "0" for b in row) for row in self.sample.mask],
            },
            "K": self.K,
            "u": self.u,
            "seed": self.seed,
            "detector_mode": self.detector_mode,
        }


def simulate_shots(
    cfg: SimConfig, first_shot: int, n_shots: int, tc: Optional[TransferCoefficients] = None
) -> ShotAccumulator:
    """Accumulate the contiguous shot range ``[first_shot, first_shot + n_shots)``."""
    tc = compute_transfer(cfg.chain) if tc is None else tc
    acc = ShotAccumulator(cfg.sample.J)
    intensity = shot_intensities(cfg.seed, first_shot, n_shots, cfg.sample.J, cfg.u)
    readout = readout_from_intensity(intensity, cfg.sample, tc, cfg.detector_mode, cfg.seed, first_shot)
    return acc.accumulate(readout)


def _resolve_threads(threads: int) -> int:
    if threads < 0:
        raise ValueError("threads must be >= 0")
    return threads or os.cpu_count() or 1


def run_simulation(cfg: SimConfig, threads: int = 1) -> tuple[GhostImage, CnrReport]:
    """Simulate ``cfg.K`` shots and reconstruct the image.

    Shots are processed in fixed ranges of ``CHUNK_SHOTS`` and merged in range
    order, so the result is bit-identical for any ``threads`` (0 = all cores).
    """
    tc = compute_transfer(cfg.chain)
    starts = range(0, cfg.K, CHUNK_SHOTS)

    def work(start):
        return simulate_shots(cfg, start, min(CHUNK_SHOTS, cfg.K - start), tc)

    workers = _resolve_threads(threads)
    acc = ShotAccumulator(cfg.sample.J)
    if workers == 1:
        for start in starts:
            acc = acc.merge(work(start))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(work, starts):
                acc = acc.merge(part)
    img = finalize(acc, u=cfg.u, chain=cfg.chain, sample=cfg.sample)
    return img, empirical_cnr(img, cfg.sample)


def write_report(report: CnrReport, cfg: SimConfig, path, image: Optional[GhostImage] = None) -> None:
    """JSON report with every CnrReport field and the full configuration echoed."""
    payload = {"report": report.to_dict(), "config": cfg.to_dict()}
    if image is not None:
        payload["bucket_mean"] = [float(v) for v in image.bucket_mean]
        payload["bucket_diff_sem"] = image.bucket_diff_sem
    atomic_write_text(path, json.dumps(payload, indent=2, allow_nan=True) + "\n")
