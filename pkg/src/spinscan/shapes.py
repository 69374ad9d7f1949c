"""Parametric microstrip outlines rasterized onto cell grids.

Five stock shapes: strip, ellipse, pyramid (tapered trapezoid), vase
(cosine-waisted bar), and wave (constant-width sinusoidal band).  Membership
is decided at cell centers against the analytic inequality.  Offsets from
the grid center are computed symmetrically in cell units first, so y-mirror
symmetry of symmetric shapes is exact cell-for-cell regardless of float
rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ParameterError
from .field import GridSpec

SHAPE_KINDS = ("strip", "ellipse", "pyramid", "vase", "wave")

# session stage order, left to right; pan positions follow this order
SESSION_ORDER = ("vase", "ellipse", "pyramid", "strip", "wave")


@dataclass(frozen=True)
class StripParams:
    length: float = 4.5e-6
    height: float = 1.0e-6


@dataclass(frozen=True)
class EllipseParams:
    semi_x: float = 2.25e-6
    semi_y: float = 0.65e-6


@dataclass(frozen=True)
class PyramidParams:
    length: float = 4.5e-6
    base_height: float = 1.3e-6
    tip_height: float = 0.2e-6


@dataclass(frozen=True)
class VaseParams:
    length: float = 4.5e-6
    half_height: float = 0.65e-6
    # half-height profile h(s) = half_height * (mean + depth*cos(2*pi*s/length)),
    # s measured from the left end; mean - depth > 0 keeps the waist open
    mean: float = 0.55
    depth: float = 0.45


@dataclass(frozen=True)
class WaveParams:
    length: float = 4.5e-6
    band_height: float = 0.6e-6
    amplitude: float = 0.3e-6
    wavelength: float = 2.25e-6


def shape_presets() -> dict:
    return {
        "strip": StripParams(),
        "ellipse": EllipseParams(),
        "pyramid": PyramidParams(),
        "vase": VaseParams(),
        "wave": WaveParams(),
    }


@dataclass
class ShapeMask:
    grid: GridSpec
    inside: np.ndarray
    kind: str
    params: object

    def __post_init__(self):
        self.inside = np.asarray(self.inside, dtype=bool)
        if self.inside.shape != (self.grid.ny, self.grid.nx):
            raise ParameterError("mask shape does not match grid")

    @property
    def cell_count(self) -> int:
        return int(self.inside.sum())


def _inside_strip(u, v, p: StripParams):
    return (np.abs(u) <= p.length / 2) & (np.abs(v) <= p.height / 2)


def _inside_ellipse(u, v, p: EllipseParams):
    return (u / p.semi_x) ** 2 + (v / p.semi_y) ** 2 <= 1.0


def _inside_pyramid(u, v, p: PyramidParams):
    s = (u + p.length / 2) / p.length  # 0 at the wide base, 1 at the tip
    half = 0.5 * (p.base_height + (p.tip_height - p.base_height) * s)
    return (np.abs(u) <= p.length / 2) & (np.abs(v) <= half)


def _inside_vase(u, v, p: VaseParams):
    # cos measured from the end puts the waist at the center of the bar
    half = p.half_height * (p.mean - p.depth * np.cos(2.0 * np.pi * u / p.length))
    return (np.abs(u) <= p.length / 2) & (np.abs(v) <= half)


def _inside_wave(u, v, p: WaveParams):
    center = p.amplitude * np.sin(2.0 * np.pi * u / p.wavelength)
    return (np.abs(u) <= p.length / 2) & (np.abs(v - center) <= p.band_height / 2)


_MEMBERSHIP = {
    "strip": _inside_strip,
    "ellipse": _inside_ellipse,
    "pyramid": _inside_pyramid,
    "vase": _inside_vase,
    "wave": _inside_wave,
}

_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def rasterize_shape(grid: GridSpec, kind: str, params=None) -> ShapeMask:
    """Rasterize one preset (or explicit params) centered on the grid.

    Raises ParameterError when the result is empty, touches the 2-cell
    margin, or falls apart into several 4-connected pieces.
    """
    if kind not in _MEMBERSHIP:
        raise ParameterError(f"unknown shape kind {kind!r}, expected one of {SHAPE_KINDS}")
    if params is None:
        params = shape_presets()[kind]

    # cell-center offsets from the grid center, exact in cell units
    iu = np.arange(grid.nx, dtype=np.float64) + 0.5 - grid.nx / 2
    jv = np.arange(grid.ny, dtype=np.float64) + 0.5 - grid.ny / 2
    u = iu[np.newaxis, :] * grid.dx
    v = jv[:, np.newaxis] * grid.dy
    inside = _MEMBERSHIP[kind](u, v, params)

    if not inside.any():
        raise ParameterError(f"{kind} rasterizes to an empty mask on {grid.nx}x{grid.ny}")
    js, is_ = np.nonzero(inside)
    margin = min(is_.min(), js.min(), grid.nx - 1 - is_.max(), grid.ny - 1 - js.max())
    if margin < 2:
        raise ParameterError(f"{kind} violates the 2-cell margin (got {margin}) on this grid")
    _, n_comp = ndimage.label(inside, structure=_FOUR_CONNECTED)
    if n_comp != 1:
        raise ParameterError(f"{kind} rasterized into {n_comp} disconnected components")
    return ShapeMask(grid=grid, inside=inside, kind=kind, params=params)


def widest_row(mask: ShapeMask) -> tuple[int, int, int]:
    """Locate the longest contiguous in-mask run over all rows.

    Returns (row j, first column, last column), inclusive.  Ties go to the
    row nearest the vertical center of the mask's bounding box, then to the
    lower index, so the choice is deterministic.
    """
    inside = mask.inside
    js = np.nonzero(inside.any(axis=1))[0]
    center = 0.5 * (js.min() + js.max())
    best = None
    for j in js:
        row = inside[j]
        # longest run of True in this row
        padded = np.diff(np.concatenate(([0], row.view(np.int8), [0])))
        starts = np.nonzero(padded == 1)[0]
        ends = np.nonzero(padded == -1)[0]
        lengths = ends - starts
        k = int(np.argmax(lengths))
        entry = (int(lengths[k]), -abs(j - center), -j, int(starts[k]), int(ends[k] - 1))
        if best is None or entry > best:
            best = entry
            best_j = int(j)
    return best_j, best[3], best[4]
