"""Frame rendering: diverging heatmaps and stacked ridgeline profiles.

Everything here is integer-exact on purpose (linear ramps, round half up,
no antialiasing) so rendered bytes can be pinned by golden tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .field import ScalarFieldSeries


@dataclass(frozen=True)
class ColorMap:
    """Diverging map on [-1, 1]: cool for negative, warm for positive.

    Channels ramp linearly from the midpoint color to either end; ends were
    picked with near-equal luminance so neither sign reads as louder.
    """

    negative: tuple = (40, 90, 255)
    zero: tuple = (16, 16, 16)
    positive: tuple = (255, 70, 40)

    def __call__(self, values: np.ndarray) -> np.ndarray:
        v = np.clip(np.asarray(values, dtype=np.float64), -1.0, 1.0)
        t = np.abs(v)[..., np.newaxis]
        lo = np.asarray(self.zero, dtype=np.float64)
        hi = np.where(
            (v >= 0.0)[..., np.newaxis],
            np.asarray(self.positive, dtype=np.float64),
            np.asarray(self.negative, dtype=np.float64),
        )
        rgb = lo + t * (hi - lo)
        return np.floor(rgb + 0.5).astype(np.uint8)  # round half up


def render_heatmap(
    frame: np.ndarray,
    mask: np.ndarray | None = None,
    cmap: ColorMap | None = None,
    upscale: int = 1,
    background: tuple = (0, 0, 0),
) -> np.ndarray:
    """Color one scalar frame; out-of-mask cells get the background color."""
    frame = np.asarray(frame)
    if frame.ndim != 2:
        raise ParameterError("heatmap input must be a 2d frame")
    if upscale < 1:
        raise ParameterError("upscale must be >= 1")
    rgb = (cmap or ColorMap())(frame)
    if mask is not None:
        rgb = rgb.copy()
        rgb[~np.asarray(mask, dtype=bool)] = background
    if upscale > 1:
        rgb = np.repeat(np.repeat(rgb, upscale, axis=0), upscale, axis=1)
    return rgb


def render_ridgeline(
    frame: np.ndarray,
    mask: np.ndarray | None = None,
    *,
    rows: int = 24,
    width: int = 640,
    height: int = 480,
    amplitude: float | None = None,
    margin: int = 32,
    line: tuple = (235, 235, 235),
    fill: tuple = (24, 26, 30),
    background: tuple = (12, 12, 14),
) -> np.ndarray:
    """Stacked row profiles, front rows occluding the ones behind.

    Each selected grid row becomes one polyline whose height tracks the
    signed cell value; the area under a line is flood-filled so nearer rows
    hide farther ones (plain painter's order, top of the grid drawn first).
    Columns that fall outside the mask leave a gap, which traces the shape
    outline through the stack.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 2:
        raise ParameterError("ridgeline input must be a 2d frame")
    ny, nx = frame.shape
    rows = min(int(rows), ny)
    if rows < 1 or width < 2 or height < 2:
        raise ParameterError("ridgeline geometry out of range")
    if margin < 0 or 2 * margin >= height:
        raise ParameterError("margin leaves no drawing area")
    inside = np.ones_like(frame, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)

    row_js = np.unique(np.round(np.linspace(0, ny - 1, rows)).astype(int))
    row_gap = (height - 2 * margin) / max(len(row_js) - 1, 1)
    if amplitude is None:
        amplitude = 1.6 * row_gap if len(row_js) > 1 else 0.4 * (height - 2 * margin)

    canvas = np.empty((height, width, 3), dtype=np.uint8)
    canvas[:] = background
    xs = np.arange(width)
    gx = xs * (nx - 1) / (width - 1)
    i0 = np.minimum(gx.astype(int), nx - 2)
    frac = gx - i0
    i_near = np.minimum(np.round(gx).astype(int), nx - 1)
    yy = np.arange(height)[:, np.newaxis]

    for k, j in enumerate(row_js):
        ok = inside[j, i_near]
        if not ok.any():
            continue
        vals = (1.0 - frac) * frame[j, i0] + frac * frame[j, i0 + 1]
        base = margin + k * row_gap
        ys = np.clip(np.round(base - vals * amplitude), 0, height - 1).astype(int)

        below = (yy > ys[np.newaxis, :]) & ok[np.newaxis, :]
        canvas[below] = fill
        prev_ok = np.concatenate(([False], ok[:-1]))
        lo = np.where(prev_ok, np.minimum(ys, np.roll(ys, 1)), ys)
        hi = np.where(prev_ok, np.maximum(ys, np.roll(ys, 1)), ys)
        stroke = (yy >= lo[np.newaxis, :]) & (yy <= hi[np.newaxis, :]) & ok[np.newaxis, :]
        canvas[stroke] = line
    return canvas


@dataclass
class AnimationFrames:
    """Lazy heatmap sequence plus the playback rate its timing implies."""

    frame_count: int
    fps: float
    _series: ScalarFieldSeries
    _mask: np.ndarray | None
    _cmap: ColorMap
    _upscale: int
    _background: tuple

    def __len__(self) -> int:
        return self.frame_count

    def __iter__(self):
        for k in range(self.frame_count):
            yield render_heatmap(
                self._series.frames[k], self._mask, self._cmap,
                self._upscale, self._background,
            )


def render_animation(
    series: ScalarFieldSeries,
    mask: np.ndarray | None = None,
    cmap: ColorMap | None = None,
    upscale: int = 1,
    background: tuple = (0, 0, 0),
) -> AnimationFrames:
    """Heatmap per frame, timed for slowed playback (series.frame_rate_playback)."""
    return AnimationFrames(
        frame_count=series.frame_count,
        fps=series.frame_rate_playback,
        _series=series,
        _mask=mask,
        _cmap=cmap or ColorMap(),
        _upscale=upscale,
        _background=background,
    )
