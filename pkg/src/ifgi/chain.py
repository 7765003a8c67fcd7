"""Field-amplitude transfer through the M-stage chain interferometer.

Light enters the lower arm with unit amplitude. Each of the ``M`` cycles is

1. a beam splitter with reflectivity ``cos^2(theta)``, ``theta = pi / 2M``,
   acting as the real rotation ``lower' = lower cos - upper sin``,
   ``upper' = lower sin + upper cos``;
2. the sample, which sits in the upper arm: a transparent pixel leaves the
   field alone, an opaque pixel absorbs all of it;
3. the mirrors, which scale the lower arm by ``eta0`` and the upper arm by
   ``eta1``.

D_0 reads the lower arm and D_1 the upper arm after the last cycle. All
other optical losses are lumped into the two mirror losses.

The propagation core only uses arithmetic, so :func:`transfer_grid` can
evaluate whole (gamma0, gamma1) grids at once with numpy broadcasting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

PixelKind = Literal["transparent", "opaque"]


@dataclass(frozen=True)
class ChainParams:
    """Geometry and loss of the chain.

    ``gamma0``/``gamma1`` are loss probabilities per reflection on the lower
    and upper arm mirrors.
    """

    M: int
    gamma0: float = 0.0
    gamma1: float = 0.0

    def __post_init__(self):
        if isinstance(self.M, bool) or int(self.M) != self.M or self.M < 1:
            raise ValueError(f"M must be a positive integer, got {self.M!r}")
        object.__setattr__(self, "M", int(self.M))
        for name in ("gamma0", "gamma1"):
            value = float(getattr(self, name))
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def theta(self) -> float:
        return math.pi / (2 * self.M)

    @property
    def eta0(self) -> float:
        return math.sqrt(1.0 - self.gamma0)

    @property
    def eta1(self) -> float:
        return math.sqrt(1.0 - self.gamma1)

    @property
    def ideal(self) -> bool:
        return self.gamma0 == 0.0 and self.gamma1 == 0.0


@dataclass(frozen=True)
class PathAmplitudes:
    """Amplitudes in the lower (D_0) and upper (D_1) arms."""

    lower: complex = 1.0 + 0.0j
    upper: complex = 0.0j

    @property
    def power(self) -> float:
        return abs(self.lower) ** 2 + abs(self.upper) ** 2


@dataclass(frozen=True)
class TransferCoefficients:
    """Detector amplitudes for both pixel classes plus per-cycle absorption.

    ``chi_abs[m]`` is the amplitude absorbed by an opaque pixel in cycle
    ``m + 1``. When produced by :func:`transfer_grid`, every field is an array
    over the grid and ``chi_abs`` carries the cycle index on axis 0.
    """

    chi_p0: complex
    chi_p1: complex
    chi_b0: complex
    chi_b1: complex
    chi_abs: np.ndarray
    absorption_weight: float


def _check_kind(pixel_kind: str) -> bool:
    if pixel_kind not in ("transparent", "opaque"):
        raise ValueError(f"pixel_kind must be 'transparent' or 'opaque', got {pixel_kind!r}")
    return pixel_kind == "opaque"


def _step(lower, upper, cos_t, sin_t, eta0, eta1, opaque):
    lower, upper = lower * cos_t - upper * sin_t, lower * sin_t + upper * cos_t
    if opaque:
        absorbed = upper
        upper = upper * 0.0
    else:
        absorbed = upper * 0.0
    return lower * eta0, upper * eta1, absorbed


def cycle_step(
    state: PathAmplitudes, params: ChainParams, pixel_kind: PixelKind
) -> tuple[PathAmplitudes, complex]:
    """Advance the arm amplitudes by one beam splitter, sample, mirror cycle.

    Returns the new state and the amplitude absorbed by the sample during this
    cycle (zero for transparent pixels).
    """
    opaque = _check_kind(pixel_kind)
    lower, upper, absorbed = _step(
        complex(state.lower),
        complex(state.upper),
        math.cos(params.theta),
        math.sin(params.theta),
        params.eta0,
        params.eta1,
        opaque,
    )
    return PathAmplitudes(lower, upper), absorbed


def _propagate(M, eta0, eta1, opaque):
    theta = math.pi / (2 * M)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    shape = np.broadcast(eta0, eta1).shape
    if shape:
        lower = np.ones(shape, dtype=complex)
        upper = np.zeros(shape, dtype=complex)
    else:
        lower, upper = 1.0 + 0.0j, 0.0j
    absorbed = []
    for _ in range(M):
        lower, upper, a = _step(lower, upper, cos_t, sin_t, eta0, eta1, opaque)
        absorbed.append(a)
    return lower, upper, absorbed


def compute_transfer(params: ChainParams) -> TransferCoefficients:
    """Run the chain for a transparent and an opaque pixel."""
    p0, p1, _ = _propagate(params.M, params.eta0, params.eta1, opaque=False)
    b0, b1, absorbed = _propagate(params.M, params.eta0, params.eta1, opaque=True)
    chi_abs = np.array(absorbed, dtype=complex)
    return TransferCoefficients(
        chi_p0=p0,
        chi_p1=p1,
        chi_b0=b0,
        chi_b1=b1,
        chi_abs=chi_abs,
        absorption_weight=float(np.sum(np.abs(chi_abs) ** 2)),
    )


def transfer_grid(M: int, gamma0, gamma1) -> TransferCoefficients:
    """Vectorised :func:`compute_transfer` over broadcastable loss arrays."""
    ChainParams(M)  # validates M
    gamma0 = np.asarray(gamma0, dtype=float)
    gamma1 = np.asarray(gamma1, dtype=float)
    for name, g in (("gamma0", gamma0), ("gamma1", gamma1)):
        if np.any((g < 0.0) | (g > 1.0)):
            raise ValueError(f"{name} values must lie in [0, 1]")
    eta0, eta1 = np.sqrt(1.0 - gamma0), np.sqrt(1.0 - gamma1)
    eta0, eta1 = np.broadcast_arrays(eta0, eta1)
    p0, p1, _ = _propagate(M, eta0, eta1, opaque=False)
    b0, b1, absorbed = _propagate(M, eta0, eta1, opaque=True)
    chi_abs = np.stack(absorbed)
    return TransferCoefficients(
        chi_p0=p0,
        chi_p1=p1,
        chi_b0=b0,
        chi_b1=b1,
        chi_abs=chi_abs,
        absorption_weight=np.sum(np.abs(chi_abs) ** 2, axis=0),
    )


def absorption_weight(params: ChainParams) -> float:
    """Fraction of the signal-arm light absorbed by one opaque pixel, summed over cycles.

    Uses the geometric-series closed form
    ``sin^2(theta) (1 - q^M) / (1 - q)`` with ``q = (eta0 cos theta)^2``.
    """
    q = (params.eta0 * math.cos(params.theta)) ** 2
    s2 = math.sin(params.theta) ** 2
    # q < 1 always since cos(theta) < 1 for M >= 1
    return s2 * (1.0 - q**params.M) / (1.0 - q)
