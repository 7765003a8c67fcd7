"""Closed-form image, noise, dose and visibility expressions.

Every formula here is elementwise, so the ``Contrasts``/``TransferCoefficients``
fields may be scalars or numpy arrays produced by
:func:`ifgi.chain.transfer_grid`.

Units: ``u`` is half the mean photon number per speckle per shot, so the
source intensity averages ``2u``; image levels are in photons squared.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .chain import ChainParams, TransferCoefficients, absorption_weight, compute_transfer, transfer_grid
from .errors import AllDark, DegenerateContrast, NoAbsorption, NoRoot

log = logging.getLogger(__name__)

RatioMode = Literal["fixed_K", "fixed_absorption"]

SCAN_POINTS = 1024
BISECT_WIDTH = 1e-12


@dataclass(frozen=True)
class Contrasts:
    C_p: float
    C_b: float


@dataclass(frozen=True)
class ExperimentBudget:
    """K shots of mean speckle intensity 2u over J_p clear and J_b opaque pixels."""

    K: int
    u: float
    J_p: int
    J_b: int

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K!r}")
        if not self.u > 0:
            raise ValueError(f"u must be > 0, got {self.u!r}")
        if self.J_p < 0 or self.J_b < 0:
            raise ValueError("pixel counts must be >= 0")

    @property
    def alpha(self) -> float:
        if self.J_p == 0:
            raise ValueError("alpha is undefined for J_p = 0")
        return self.J_b / self.J_p


def contrasts(tc: TransferCoefficients) -> Contrasts:
    return Contrasts(
        C_p=np.abs(tc.chi_p1) ** 2 - np.abs(tc.chi_p0) ** 2,
        C_b=np.abs(tc.chi_b0) ** 2 - np.abs(tc.chi_b1) ** 2,
    )


def expected_image_levels(c: Contrasts, budget: ExperimentBudget):
    """Mean reconstructed signal ``(G_p, G_b)`` on clear and opaque pixels."""
    scale = (budget.K - 1) / (2 * budget.K) * budget.u**2
    return scale * c.C_p, -scale * c.C_b


def _check_contrast(c: Contrasts):
    if np.any((np.asarray(c.C_p) == 0) & (np.asarray(c.C_b) == 0)):
        raise DegenerateContrast("C_p = C_b = 0: the image carries no contrast")


def cnr_exact(c: Contrasts, budget: ExperimentBudget):
    """Finite-K contrast-to-noise ratio of the differential ghost image."""
    if budget.K < 2:
        raise ValueError("cnr_exact needs K >= 2")
    if budget.J_p < 1:
        raise ValueError("cnr_exact needs J_p >= 1")
    _check_contrast(c)
    K = budget.K
    extra = 3.5 - 3.0 / K
    den = c.C_p**2 * (budget.J_p + extra) + c.C_b**2 * (budget.J_b + extra)
    return (c.C_p + c.C_b) * math.sqrt(K - 1) / np.sqrt(den)


def cnr_large_k(c: Contrasts, K, J_p, alpha):
    """Large K, J_p, J_b limit of :func:`cnr_exact`."""
    if J_p < 1:
        raise ValueError("cnr_large_k needs J_p >= 1")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    _check_contrast(c)
    return np.sqrt(K / J_p) * (c.C_p + c.C_b) / np.sqrt(c.C_p**2 + alpha * c.C_b**2)


def cnr_max(K, J_p, alpha):
    """CNR on the background-cancellation line ``C_p = alpha C_b``."""
    return math.sqrt(K / J_p) * math.sqrt(1.0 + 1.0 / alpha)


def visibility(tc: TransferCoefficients):
    p0, p1 = np.abs(tc.chi_p0) ** 2, np.abs(tc.chi_p1) ** 2
    b0, b1 = np.abs(tc.chi_b0) ** 2, np.abs(tc.chi_b1) ** 2
    total = p1 + b0 + b1 + p0
    if np.any(total == 0):
        raise AllDark("every transfer coefficient is zero")
    return np.abs(p1 + b0 - b1 - p0) / total


def bucket_means(tc: TransferCoefficients, budget: ExperimentBudget):
    """Mean photons per shot at D_0 and D_1, and ``<I_1> - <I_0>`` from the contrasts."""
    J_p, J_b, u = budget.J_p, budget.J_b, budget.u
    I0 = (J_p * np.abs(tc.chi_p0) ** 2 + J_b * np.abs(tc.chi_b0) ** 2) * u
    I1 = (J_p * np.abs(tc.chi_p1) ** 2 + J_b * np.abs(tc.chi_b1) ** 2) * u
    c = contrasts(tc)
    # J_p (C_p - alpha C_b) u, written without dividing by J_p
    diff = (J_p * c.C_p - J_b * c.C_b) * u
    return I0, I1, diff


def total_absorption(params: ChainParams, budget: ExperimentBudget) -> float:
    """Photons absorbed by the opaque pixels over all K shots."""
    return budget.u * budget.K * budget.J_b * absorption_weight(params)


def equal_absorption_measurements(params: ChainParams, K_prime: int) -> int:
    """Shots this scheme may take for the dose of ``K_prime`` traditional shots.

    Rounded down so the sample never receives more light than the baseline.
    """
    if K_prime < 1:
        raise ValueError("K_prime must be >= 1")
    w = absorption_weight(params)
    if w <= 0.0:
        raise NoAbsorption("absorption weight is zero; doses cannot be equalised")
    return max(1, math.floor(K_prime / w))


def traditional_cnr(K_prime: int, J_p: int, J_b: int, large_k: bool = False):
    """Ideal single-pass thermal ghost imaging (``C_p = 1, C_b = 0``)."""
    c = Contrasts(1.0, 0.0)
    if large_k:
        return cnr_large_k(c, K_prime, J_p, J_b / J_p if J_p else 0.0)
    return cnr_exact(c, ExperimentBudget(K_prime, 1.0, J_p, J_b))


def cnr_ratio_from_transfer(
    tc: TransferCoefficients,
    J_p: int,
    J_b: int,
    K_prime: int,
    mode: RatioMode = "fixed_K",
    large_k: bool = False,
):
    """CNR of this scheme over the ideal traditional CNR at ``K_prime`` shots.

    Works elementwise on grid-valued ``tc``. In ``fixed_absorption`` mode the
    scheme gets ``floor(K_prime / absorption_weight)`` shots.
    """
    if K_prime < 2:
        raise ValueError("K_prime must be >= 2")
    if J_p < 1:
        raise ValueError("J_p must be >= 1")
    c = contrasts(tc)
    if mode == "fixed_K":
        K = K_prime
    elif mode == "fixed_absorption":
        w = np.asarray(tc.absorption_weight)
        if np.any(w <= 0):
            raise NoAbsorption("absorption weight is zero; doses cannot be equalised")
        K = np.maximum(1, np.floor(K_prime / w))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    baseline = traditional_cnr(K_prime, J_p, J_b, large_k)
    if large_k:
        return cnr_large_k(c, K, J_p, J_b / J_p) / baseline
    _check_contrast(c)
    # cnr_exact with an array-valued K
    extra = 3.5 - 3.0 / K
    den = c.C_p**2 * (J_p + extra) + c.C_b**2 * (J_b + extra)
    return (c.C_p + c.C_b) * np.sqrt(K - 1) / np.sqrt(den) / baseline


def cnr_ratio(
    params: ChainParams,
    J_p: int,
    J_b: int,
    K_prime: int,
    mode: RatioMode = "fixed_K",
    large_k: bool = False,
) -> float:
    return float(cnr_ratio_from_transfer(compute_transfer(params), J_p, J_b, K_prime, mode, large_k))


def cancellation_residual(M: int, gamma1: float, alpha: float, gamma0):
    """``C_p - alpha C_b`` as a function of the lower-arm loss."""
    c = contrasts(transfer_grid(M, gamma0, gamma1))
    return c.C_p - alpha * c.C_b


def cancellation_roots(M: int, gamma1: float, alpha: float) -> list[float]:
    """All lower-arm losses in [0, 1) where the bucket signals balance.

    A 1024-point scan brackets sign changes of ``C_p - alpha C_b``; each
    bracket is bisected down to a width of 1e-12.
    """
    grid = np.arange(SCAN_POINTS) / SCAN_POINTS
    f = cancellation_residual(M, gamma1, alpha, grid)
    roots = [float(g) for g, v in zip(grid, f) if v == 0.0]
    for i in np.nonzero(f[:-1] * f[1:] < 0)[0]:
        lo, hi, f_lo = float(grid[i]), float(grid[i + 1]), float(f[i])
        while hi - lo > BISECT_WIDTH:
            mid = 0.5 * (lo + hi)
            f_mid = float(cancellation_residual(M, gamma1, alpha, mid))
            if f_mid == 0.0:
                lo = hi = mid
                break
            if (f_mid < 0) == (f_lo < 0):
                lo, f_lo = mid, f_mid
            else:
                hi = mid
        f_hi = float(cancellation_residual(M, gamma1, alpha, hi))
        roots.append(lo if abs(f_lo) <= abs(f_hi) else hi)
    return sorted(roots)


def optimize_gamma0(M: int, gamma1: float, alpha: float) -> float:
    """Lower-arm loss that cancels the bucket background (``C_p = alpha C_b``).

    Returns the smallest root; raises :class:`NoRoot` when the scan finds no
    sign change.
    """
    if M < 2:
        raise ValueError("optimize_gamma0 needs M >= 2")
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    if not 0.0 <= gamma1 <= 1.0:
        raise ValueError("gamma1 must lie in [0, 1]")
    roots = cancellation_roots(M, gamma1, alpha)
    if not roots:
        raise NoRoot(f"C_p - alpha*C_b has no sign change on [0, 1) for M={M}, gamma1={gamma1}, alpha={alpha}")
    if len(roots) > 1:
        log.info("multiple cancellation roots %s; returning the first", roots)
    return roots[0]
