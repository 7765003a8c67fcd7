"""Binary sample masks: construction, synthesis and plain PBM (P1) I/O.

``True`` marks an opaque pixel, ``False`` a transparent one. Each pixel is
one speckle and one CCD cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from ._io import atomic_write_text
from .errors import EmptyGrid, ParseError, RaggedGrid, UnreachableAlpha

Pattern = Literal["checkerboard", "half_plane", "random"]


@dataclass(frozen=True, eq=False)
class BinarySample:
    mask: np.ndarray
    J_p: int = field(init=False)
    J_b: int = field(init=False)

    def __post_init__(self):
        mask = np.array(self.mask, dtype=bool)
        if mask.ndim != 2 or mask.size == 0:
            raise EmptyGrid("mask must be a non-empty 2-D grid")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        J_b = int(mask.sum())
        object.__setattr__(self, "J_b", J_b)
        object.__setattr__(self, "J_p", mask.size - J_b)

    @property
    def height(self) -> int:
        return self.mask.shape[0]

    @property
    def width(self) -> int:
        return self.mask.shape[1]

    @property
    def J(self) -> int:
        return self.mask.size

    @property
    def alpha(self) -> float:
        """Opaque-to-transparent ratio ``J_b / J_p``; ``nan`` if nothing is transparent."""
        return self.J_b / self.J_p if self.J_p else math.nan

    @property
    def opaque(self) -> np.ndarray:
        """Row-major flat opaque flags, the pixel order used by the simulator."""
        return self.mask.ravel()

    def __eq__(self, other):
        if not isinstance(other, BinarySample):
            return NotImplemented
        return self.mask.shape == other.mask.shape and bool(np.all(self.mask == other.mask))

    def __repr__(self):
        return (
            f"BinarySample({self.width}x{self.height}, J_p={self.J_p}, "
            f"J_b={self.J_b}, alpha={self.alpha:.6g})"
        )


def from_grid(grid) -> BinarySample:
    """Build a sample from a nested sequence or 2-D array of truthy values."""
    if isinstance(grid, np.ndarray):
        if grid.ndim != 2:
            raise RaggedGrid(f"expected a 2-D grid, got {grid.ndim} dimensions")
        if grid.size == 0:
            raise EmptyGrid("grid has no pixels")
        return BinarySample(grid.astype(bool))
    rows = [list(r) for r in grid]
    if not rows or not rows[0]:
        raise EmptyGrid("grid has no pixels")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise RaggedGrid(f"row {i} has {len(r)} entries, expected {width}")
    return BinarySample(np.array(rows, dtype=bool))


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def synthesize(
    pattern: Pattern, width: int, height: int, alpha_target: float = 1.0, seed: int = 0
) -> BinarySample:
    """Generate a test mask.

    ``checkerboard`` ignores ``alpha_target`` (its alpha is ~1). ``half_plane``
    makes the leftmost ``round(width / (1 + alpha))`` columns transparent.
    ``random`` places exactly ``round(J * alpha / (1 + alpha))`` opaque pixels by a
    seeded shuffle.
    """
    if width < 1 or height < 1:
        raise EmptyGrid("width and height must be >= 1")
    if alpha_target < 0 or not math.isfinite(alpha_target):
        raise ValueError(f"alpha_target must be finite and >= 0, got {alpha_target!r}")
    J = width * height
    if pattern == "checkerboard":
        yy, xx = np.indices((height, width))
        return BinarySample((xx + yy) % 2 == 1)
    if pattern == "half_plane":
        n_clear = _round_half_up(width / (1.0 + alpha_target))
        if n_clear == 0:
            raise UnreachableAlpha(f"alpha={alpha_target} leaves no transparent column")
        mask = np.zeros((height, width), dtype=bool)
        mask[:, n_clear:] = True
        return BinarySample(mask)
    if pattern == "random":
        n_opaque = _round_half_up(J * alpha_target / (1.0 + alpha_target))
        if n_opaque >= J:
            raise UnreachableAlpha(f"alpha={alpha_target} rounds to zero transparent pixels")
        flat = np.zeros(J, dtype=bool)
        flat[:n_opaque] = True
        rng = np.random.default_rng(seed)
        return BinarySample(rng.permutation(flat).reshape(height, width))
    raise ValueError(f"unknown pattern {pattern!r}")


def _pbm_tokens(text: str):
    """Yield (token, line, column) for a plain PBM, skipping comments."""
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        col = 0
        while col < len(line):
            if line[col].isspace():
                col += 1
                continue
            start = col
            while col < len(line) and not line[col].isspace():
                col += 1
            yield line[start:col], lineno, start + 1


def parse_pbm(text: str) -> BinarySample:
    tokens = _pbm_tokens(text)
    try:
        magic, line, col = next(tokens)
    except StopIteration:
        raise ParseError("empty file", 1, 1) from None
    if magic != "P1":
        raise ParseError(f"unsupported magic {magic!r}, only plain PBM 'P1' is accepted", line, col)
    dims = []
    for name in ("width", "height"):
        try:
            tok, line, col = next(tokens)
        except StopIteration:
            raise ParseError(f"missing {name}", line, col) from None
        if not tok.isdigit() or int(tok) < 1:
            raise ParseError(f"invalid {name} {tok!r}", line, col)
        dims.append(int(tok))
    width, height = dims
    bits: list[bool] = []
    for tok, line, col in tokens:
        # plain PBM allows raster bits without separating whitespace
        for k, ch in enumerate(tok):
            if ch not in "01":
                raise ParseError(f"invalid raster character {ch!r}", line, col + k)
            if len(bits) == width * height:
                raise ParseError("more raster bits than width*height", line, col + k)
            bits.append(ch == "1")
    if len(bits) != width * height:
        raise ParseError(f"expected {width * height} raster bits, found {len(bits)}", line, col)
    return BinarySample(np.array(bits, dtype=bool).reshape(height, width))


def format_pbm(sample: BinarySample) -> str:
    lines = ["P1", f"{sample.width} {sample.height}"]
    lines += [" ".join("1" if b else "0" for b in row) for row in sample.mask]
    return "\n".join(lines) + "\n"


def load_mask(path) -> BinarySample:
    """Read a plain PBM; bit 1 is opaque. Raises :class:`ParseError` or ``OSError``."""
    return parse_pbm(Path(path).read_text(encoding="ascii", errors="replace"))


def save_mask(sample: BinarySample, path) -> None:
    atomic_write_text(path, format_pbm(sample))
