"""Grid geometry, frame stacks, and node-centered interpolation.

Sampling coordinates are cell-relative: the value of cell (i, j) lives at
the integer point x = i, y = j, with x running along the row (inner index)
and y across rows (outer index).  Frames are indexed frame[y][x].  Physical
cell sizes matter only to the solver; sonification and rendering are
resolution-relative on purpose.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class GridSpec:
    """Uniform 2D cell grid of the film plane plus the film thickness."""

    nx: int = 500
    ny: int = 150
    dx: float = 10e-9
    dy: float = 10e-9
    thickness: float = 25e-9

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ParameterError(f"grid must be at least 2x2, got {self.nx}x{self.ny}")
        if min(self.dx, self.dy, self.thickness) <= 0.0:
            raise ParameterError("cell sizes and thickness must be positive")

    def scaled(self, factor: float) -> "GridSpec":
        """Shrink (factor < 1) or grow the cell counts, keeping the physical frame.

        Cell size scales inversely, so factor 0.25 on the default grid gives
        125 x 38 cells of 40 nm.  Counts use round-half-up.
        """
        if factor <= 0:
            raise ParameterError(f"scale factor must be positive, got {factor}")
        nx = max(2, int(np.floor(self.nx * factor + 0.5)))
        ny = max(2, int(np.floor(self.ny * factor + 0.5)))
        return replace(self, nx=nx, ny=ny, dx=self.dx / factor, dy=self.dy / factor)


@dataclass
class ScalarFieldSeries:
    """Time-ordered stack of scalar frames over one grid.

    frames has shape (frame_count, ny, nx) and is kept read-only; frame_dt is
    the physical time between frames, frame_rate_playback the display rate
    used when the stack is mapped onto audio or screen time.
    """

    grid: GridSpec
    frames: np.ndarray
    frame_dt: float
    frame_rate_playback: float = 10.0

    def __post_init__(self):
        self.frames = np.asarray(self.frames)
        if self.frames.ndim != 3:
            raise ParameterError(f"frames must be 3D, got shape {self.frames.shape}")
        f, ny, nx = self.frames.shape
        if f < 1:
            raise ParameterError("series needs at least one frame")
        if (ny, nx) != (self.grid.ny, self.grid.nx):
            raise ParameterError(
                f"frame shape {ny}x{nx} does not match grid {self.grid.ny}x{self.grid.nx}"
            )
        if self.frame_dt <= 0 or self.frame_rate_playback <= 0:
            raise ParameterError("frame_dt and frame_rate_playback must be positive")
        self.frames.setflags(write=False)

    @property
    def frame_count(self) -> int:
        return self.frames.shape[0]


@dataclass
class VectorField:
    """Per-cell 3-vectors on a grid, with the material mask that owns them.

    For magnetization, in-mask cells are unit vectors and everything outside
    the mask is exactly zero.  The container is also reused for field output
    (units A/m), where no unit-norm constraint applies.
    """

    grid: GridSpec
    m: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=np.float64)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.m.shape != (self.grid.ny, self.grid.nx, 3):
            raise ParameterError(f"vector array shape {self.m.shape} does not match grid")
        if self.mask.shape != (self.grid.ny, self.grid.nx):
            raise ParameterError("mask shape does not match grid")

    def validate_unit(self, tol: float = 1e-6) -> None:
        """Check the magnetization contract: unit length inside, zero outside."""
        norms = np.linalg.norm(self.m, axis=-1)
        if self.mask.any() and np.max(np.abs(norms[self.mask] - 1.0)) >= tol:
            raise ParameterError("in-mask magnetization is not unit length")
        if (~self.mask).any() and np.max(norms[~self.mask]) != 0.0:
            raise ParameterError("out-of-mask cells must be exactly zero")


def _check_range(v: float, hi: int, name: str) -> None:
    if not (0.0 <= v <= hi):
        raise ParameterError(f"{name}={v} outside [0, {hi}]")


def sample_bilinear(frame: np.ndarray, x: float, y: float) -> float:
    """Bilinear interpolation at continuous cell coordinates.

    Node-centered: integer (x, y) returns the cell value exactly.  Raises
    ParameterError outside [0, nx-1] x [0, ny-1]; no extrapolation.
    """
    frame = np.asarray(frame)
    ny, nx = frame.shape
    _check_range(x, nx - 1, "x")
    _check_range(y, ny - 1, "y")
    i0 = int(x)
    j0 = int(y)
    i1 = min(i0 + 1, nx - 1)
    j1 = min(j0 + 1, ny - 1)
    wx = x - i0
    wy = y - j0
    top = (1.0 - wx) * float(frame[j0, i0]) + wx * float(frame[j0, i1])
    bot = (1.0 - wx) * float(frame[j1, i0]) + wx * float(frame[j1, i1])
    return (1.0 - wy) * top + wy * bot


def sample_frame_fraction(series: ScalarFieldSeries, x: float, y: float, f: float) -> float:
    """Trilinear sample at fractional frame position f in [0, frame_count-1]."""
    last = series.frame_count - 1
    if not (0.0 <= f <= last):
        raise ParameterError(f"frame position {f} outside [0, {last}]")
    k0 = int(f)
    k1 = min(k0 + 1, last)
    wt = f - k0
    a = sample_bilinear(series.frames[k0], x, y)
    if wt == 0.0:
        return a
    b = sample_bilinear(series.frames[k1], x, y)
    return (1.0 - wt) * a + wt * b


def sample_trilinear(
    series: ScalarFieldSeries, x: float, y: float, t: float, frame_interval: float | None = None
) -> float:
    """Space-time interpolation; t in seconds along the series.

    frame_interval defaults to the physical frame_dt.  Callers that map the
    stack onto playback time (one frame per 1/fps) pass 1/fps instead.  At
    exact frame times this equals sample_bilinear on that frame; t beyond the
    last frame is an error, clamping is the caller's business.
    """
    dt = series.frame_dt if frame_interval is None else frame_interval
    if dt <= 0:
        raise ParameterError("frame interval must be positive")
    return sample_frame_fraction(series, x, y, t / dt)


@dataclass(frozen=True)
class NormalizeResult:
    series: ScalarFieldSeries
    scale: float
    degenerate: bool = False


def normalize_series(series: ScalarFieldSeries) -> NormalizeResult:
    """Rescale a series so the global max |value| is exactly 1.

    Returns the applied multiplier (1/max).  All-zero input is returned
    unchanged with scale 1 and the degenerate flag set.  Idempotent: a series
    whose max is already 1 passes through untouched.
    """
    peak = float(np.max(np.abs(series.frames))) if series.frames.size else 0.0
    if peak == 0.0:
        return NormalizeResult(series, 1.0, degenerate=True)
    if peak == 1.0:
        return NormalizeResult(series, 1.0, degenerate=False)
    # divide (not multiply by 1/peak) so the peak cell lands on 1.0 exactly
    scaled = replace(series, frames=(series.frames / peak).astype(series.frames.dtype))
    return NormalizeResult(scaled, 1.0 / peak, degenerate=False)
