"""Scanned synthesis over frame stacks, loop detection, panning, mixing.

A sampling path cycles through the mask at the fundamental frequency f0
while the stack plays back at its display frame rate (one frame per 1/fps
of audio time).  Each output sample is a single trilinear lookup, so the
cost per sample does not depend on the image size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DataError, ParameterError
from .field import ScalarFieldSeries
from .shapes import ShapeMask, widest_row

PENTATONIC_HZ = (98.0, 110.0, 123.0, 165.0, 185.0)
PAN_POSITIONS = (0.0, 0.25, 0.5, 0.75, 1.0)


def pentatonic_defaults() -> list[float]:
    """Stage fundamentals, low to high, one per session slot."""
    return list(PENTATONIC_HZ)


def pan_positions() -> list[float]:
    """Stereo positions matching the session slots, left to right."""
    return list(PAN_POSITIONS)


def quantize_scan_frequency(f0: float, fs: int) -> float:
    """Snap f0 so one scan cycle is a whole number of samples.

    Loop lengths are multiples of round(fs/f0) samples; synthesizing at
    fs/round(fs/f0) makes those loops phase-exact in the path while moving
    the pitch by well under one hertz for the stock fundamentals.
    """
    spp = samples_per_cycle(f0, fs)
    return fs / spp


def samples_per_cycle(f0: float, fs: int) -> int:
    if not (0.0 < f0 < fs / 2):
        raise ParameterError(f"f0={f0} outside (0, fs/2)")
    spp = int(round(fs / f0))
    if spp < 2:
        raise ParameterError(f"f0={f0} too high for fs={fs}")
    return spp


@dataclass(frozen=True)
class SonifyConfig:
    f0: float
    fs: int = 44100
    fps: float = 10.0
    gain: float = 1.0

    def __post_init__(self):
        if self.fs <= 0:
            raise ParameterError("fs must be positive")
        if not (0.0 < self.f0 < self.fs / 2):
            raise ParameterError(f"f0={self.f0} outside (0, fs/2)")
        if self.fps <= 0:
            raise ParameterError("fps must be positive")
        if self.gain < 0:
            raise ParameterError("gain must be non-negative")


@dataclass
class AudioClip:
    """Float samples in [-1, 1]; mono shape (n,), stereo shape (n, 2)."""

    data: np.ndarray
    fs: int

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim not in (1, 2) or (self.data.ndim == 2 and self.data.shape[1] != 2):
            raise ParameterError(f"bad sample layout {self.data.shape}")
        if self.fs <= 0:
            raise ParameterError("fs must be positive")
        if self.data.size:
            peak = float(np.max(np.abs(self.data)))
            if peak > 1.0 + 1e-9:
                raise ParameterError(f"samples exceed unity (peak {peak})")
            if peak > 1.0:  # shave float fuzz only
                self.data = np.clip(self.data, -1.0, 1.0)

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def stereo(self) -> bool:
        return self.data.ndim == 2


@dataclass
class SamplingPath:
    """Closed polyline in cell coordinates, traversed once per scan cycle.

    Waypoints are spaced evenly in arc length, so phase maps to position at
    constant speed.  position(0) == position(1).
    """

    waypoints: np.ndarray
    kind: str
    mask: ShapeMask

    def __post_init__(self):
        self.waypoints = np.asarray(self.waypoints, dtype=np.float64)
        if self.waypoints.ndim != 2 or self.waypoints.shape[1] != 2 or len(self.waypoints) < 3:
            raise ParameterError("path needs at least 3 (x, y) waypoints")
        inside = self.mask.inside
        xs, ys = self.waypoints[:, 0], self.waypoints[:, 1]
        i0 = np.floor(xs).astype(int)
        j0 = np.floor(ys).astype(int)
        i1 = np.ceil(xs).astype(int)
        j1 = np.ceil(ys).astype(int)
        ok = (
            (i0 >= 0) & (j0 >= 0) & (i1 < inside.shape[1]) & (j1 < inside.shape[0])
        )
        if not ok.all():
            raise ParameterError("waypoint outside the grid")
        for jj, ii in ((j0, i0), (j0, i1), (j1, i0), (j1, i1)):
            if not inside[jj, ii].all():
                raise ParameterError("waypoint not strictly inside the mask")
        closed = np.vstack([self.waypoints, self.waypoints[:1]])
        seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
        self._cum = np.concatenate([[0.0], np.cumsum(seg)])
        if self._cum[-1] <= 0:
            raise ParameterError("degenerate path with zero length")
        self._closed = closed

    def positions(self, phases: np.ndarray) -> np.ndarray:
        """Vectorized position lookup; phases wrap modulo 1."""
        phases = np.asarray(phases, dtype=np.float64) % 1.0
        s = phases * self._cum[-1]
        k = np.clip(np.searchsorted(self._cum, s, side="right") - 1, 0, len(self._closed) - 2)
        seg_len = self._cum[k + 1] - self._cum[k]
        w = np.where(seg_len > 0, (s - self._cum[k]) / np.where(seg_len > 0, seg_len, 1.0), 0.0)
        return self._closed[k] + w[..., np.newaxis] * (self._closed[k + 1] - self._closed[k])

    def position(self, phase: float) -> tuple[float, float]:
        p = self.positions(np.asarray([phase]))[0]
        return float(p[0]), float(p[1])


def _pingpong_waypoints(mask: ShapeMask, n: int) -> np.ndarray:
    j, i0, i1 = widest_row(mask)
    if i1 <= i0:
        raise ParameterError("widest row has a single cell, cannot scan it")
    k = np.arange(n, dtype=np.float64)
    phase = k / n
    tri = 1.0 - np.abs(1.0 - 2.0 * phase)  # 0 -> 1 -> 0, apex at phase 0.5
    pts = np.empty((n, 2))
    pts[:, 0] = i0 + tri * (i1 - i0)
    pts[:, 1] = j
    return pts


def _trace_boundary(region: np.ndarray) -> list[tuple[int, int]]:
    """Moore-neighbor boundary trace, clockwise, for a fat 4-connected blob."""
    js, is_ = np.nonzero(region)
    start = (int(js[0]), int(is_[0]))  # first in row-major order
    offs = [(0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1)]
    ny, nx = region.shape

    def filled(p):
        return 0 <= p[0] < ny and 0 <= p[1] < nx and region[p[0], p[1]]

    boundary = [start]
    prev = (start[0], start[1] - 1)  # guaranteed empty by the scan order
    cur = start
    while True:
        k = offs.index((prev[0] - cur[0], prev[1] - cur[1]))
        nxt = None
        for d in range(1, 9):
            off = offs[(k + d) % 8]
            cand = (cur[0] + off[0], cur[1] + off[1])
            if filled(cand):
                nxt = cand
                back = offs[(k + d - 1) % 8]
                prev = (cur[0] + back[0], cur[1] + back[1])
                break
        if nxt is None or (nxt == start and len(boundary) > 2):
            break
        cur = nxt
        boundary.append(cur)
    return boundary


def _racetrack_waypoints(mask: ShapeMask, n: int) -> np.ndarray:
    # inset the loop by 10% of the deepest interior distance
    dist = ndimage.distance_transform_edt(mask.inside)
    inset = 0.1 * float(dist.max())
    region = dist > inset
    if region.sum() < 3:
        raise ParameterError("mask too small for a racetrack path")
    cells = _trace_boundary(region)
    if len(cells) < 3:
        raise ParameterError("racetrack boundary degenerated to a point")
    pts = np.array([(i, j) for j, i in cells], dtype=np.float64)
    closed = np.vstack([pts, pts[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    # resample to n waypoints equally spaced in arc length
    s = np.linspace(0.0, total, n, endpoint=False)
    k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(closed) - 2)
    w = (s - cum[k]) / np.maximum(cum[k + 1] - cum[k], 1e-300)
    return closed[k] + w[:, np.newaxis] * (closed[k + 1] - closed[k])


def build_path(mask: ShapeMask, kind: str = "scanline-pingpong", n_waypoints: int = 256) -> SamplingPath:
    """Construct a stock path over a mask.

    scanline-pingpong runs the widest row left to right and back, apex at
    phase 0.5.  racetrack follows a closed loop inset 10% from the mask
    boundary.  Custom paths go through SamplingPath directly.
    """
    if n_waypoints < 4 or n_waypoints % 2:
        raise ParameterError("n_waypoints must be even and at least 4")
    if kind == "scanline-pingpong":
        pts = _pingpong_waypoints(mask, n_waypoints)
    elif kind == "racetrack":
        pts = _racetrack_waypoints(mask, n_waypoints)
    else:
        raise ParameterError(f"unknown path kind {kind!r}")
    return SamplingPath(waypoints=pts, kind=kind, mask=mask)


def clip_length(series: ScalarFieldSeries, cfg: SonifyConfig) -> int:
    return int(np.floor(cfg.fs * series.frame_count / cfg.fps))


def scan_synthesize(series: ScalarFieldSeries, path: SamplingPath, cfg: SonifyConfig) -> AudioClip:
    """Render the full mono clip for a stack.

    Sample n at time t = n/fs reads the path at phase frac(f0*t) and the
    stack at playback position t*fps (held on the last frame past the end).
    The series should be normalized first; gain then keeps samples in range.
    """
    n_total = clip_length(series, cfg)
    frames = series.frames
    f_count, ny, nx = frames.shape
    flat = np.ascontiguousarray(frames, dtype=np.float64).reshape(f_count, -1)
    out = np.empty(n_total)
    chunk = 1 << 20
    for lo in range(0, n_total, chunk):
        hi = min(lo + chunk, n_total)
        t = np.arange(lo, hi, dtype=np.float64) / cfg.fs
        pos = path.positions(cfg.f0 * t)
        xs, ys = pos[:, 0], pos[:, 1]
        fpos = np.minimum(t * cfg.fps, f_count - 1.0)
        k0 = fpos.astype(np.int64)
        k1 = np.minimum(k0 + 1, f_count - 1)
        wt = fpos - k0
        i0 = xs.astype(np.int64)
        j0 = ys.astype(np.int64)
        i1 = np.minimum(i0 + 1, nx - 1)
        j1 = np.minimum(j0 + 1, ny - 1)
        wx = xs - i0
        wy = ys - j0
        w00 = (1 - wx) * (1 - wy)
        w10 = wx * (1 - wy)
        w01 = (1 - wx) * wy
        w11 = wx * wy
        a00, a10 = j0 * nx + i0, j0 * nx + i1
        a01, a11 = j1 * nx + i0, j1 * nx + i1
        va = flat[k0, a00] * w00 + flat[k0, a10] * w10 + flat[k0, a01] * w01 + flat[k0, a11] * w11
        vb = flat[k1, a00] * w00 + flat[k1, a10] * w10 + flat[k1, a01] * w01 + flat[k1, a11] * w11
        out[lo:hi] = (1 - wt) * va + wt * vb
    out *= cfg.gain
    return AudioClip(data=out, fs=cfg.fs)


@dataclass(frozen=True)
class LoopSpec:
    """Sample indices delimiting the one-shot transient and the steady loop."""

    transient_end: int
    loop_start: int
    loop_end: int
    fallback: bool = False

    def __post_init__(self):
        if not (0 <= self.transient_end <= self.loop_start < self.loop_end):
            raise ParameterError(
                f"inconsistent loop spec {self.transient_end}/{self.loop_start}/{self.loop_end}"
            )


def period_rms(series: ScalarFieldSeries, frames_per_period: int, mask=None) -> np.ndarray:
    """RMS of the (optionally masked) frames, grouped per excitation period."""
    p = series.frame_count // frames_per_period
    if p < 1:
        raise ParameterError("series shorter than one excitation period")
    frames = series.frames[: p * frames_per_period].astype(np.float64, copy=False)
    vals = frames[:, mask] if mask is not None else frames.reshape(p * frames_per_period, -1)
    vals = vals.reshape(p, -1)
    return np.sqrt(np.mean(vals * vals, axis=1))


def detect_loop_points(
    series: ScalarFieldSeries,
    cfg: SonifyConfig,
    frames_per_period: int = 20,
    mask=None,
) -> LoopSpec:
    """Find the transient/steady split and a loop that closes cleanly.

    Steady state begins at the first period whose RMS stays within 1% of the
    end plateau (mean RMS of the last 3 periods) for 3 consecutive periods.
    The loop starts there and spans the largest whole number of scan cycles
    (round(fs/f0) samples each) that also lands on an excitation-period
    boundary to within half a cycle, so the data phase matches across the
    seam.  If the 1% plateau is never reached the last quarter of the clip
    is used instead and the fallback flag is set.
    """
    fpp = frames_per_period
    if fpp < 1:
        raise ParameterError("frames_per_period must be at least 1")
    n_periods = series.frame_count // fpp
    if n_periods < 5:
        raise ParameterError(f"need at least 5 excitation periods, got {n_periods}")
    n_total = clip_length(series, cfg)
    samples_per_frame = cfg.fs / cfg.fps

    r = period_rms(series, fpp, mask)
    r_ref = float(np.mean(r[-3:]))
    onset = None
    if r_ref > 0.0:
        dev = np.abs(r - r_ref) / r_ref
        for p in range(n_periods - 2):
            if np.all(dev[p : p + 3] < 0.01):
                onset = p
                break

    spp = samples_per_cycle(cfg.f0, cfg.fs)
    fallback = onset is None
    if not fallback:
        transient_end = int(round(onset * fpp * samples_per_frame))
        if n_total - transient_end < spp:
            fallback = True
    if fallback:
        transient_end = int(np.floor(0.75 * n_total))

    steady = n_total - transient_end
    n_max = steady // spp
    if n_max < 1:
        raise DataError("steady segment shorter than one scan cycle, nothing to loop")
    period_samples = samples_per_frame * fpp
    m = int(np.floor(steady / period_samples))
    if m >= 1:
        n_cycles = int(min(n_max, max(1, round(m * period_samples / spp))))
    else:
        n_cycles = int(n_max)
    return LoopSpec(
        transient_end=transient_end,
        loop_start=transient_end,
        loop_end=transient_end + n_cycles * spp,
        fallback=fallback,
    )


def pan(clip: AudioClip, position: float) -> AudioClip:
    """Constant-power stereo placement; 0 is hard left, 1 hard right."""
    if not (0.0 <= position <= 1.0):
        raise ParameterError(f"pan position {position} outside [0, 1]")
    if clip.stereo:
        raise ParameterError("pan expects a mono clip")
    angle = position * np.pi / 2
    data = np.empty((clip.n_samples, 2))
    data[:, 0] = np.cos(angle) * clip.data
    data[:, 1] = np.sin(angle) * clip.data
    return AudioClip(data=data, fs=clip.fs)


def mix(clips: list[AudioClip], offsets: list[int] | None = None) -> AudioClip:
    """Sum stereo clips at sample offsets; normalize only if the peak exceeds 1."""
    if not clips:
        raise ParameterError("nothing to mix")
    if offsets is None:
        offsets = [0] * len(clips)
    if len(offsets) != len(clips):
        raise ParameterError("offsets must match clips")
    fs = clips[0].fs
    for c in clips:
        if c.fs != fs:
            raise ParameterError("sample-rate mismatch in mix")
        if not c.stereo:
            raise ParameterError("mix expects stereo clips")
    for off in offsets:
        if off < 0:
            raise ParameterError("offsets must be non-negative")
    n_out = max(off + c.n_samples for off, c in zip(offsets, clips))
    acc = np.zeros((n_out, 2))
    for off, c in zip(offsets, clips):
        acc[off : off + c.n_samples] += c.data
    peak = float(np.max(np.abs(acc))) if acc.size else 0.0
    if peak > 1.0:
        acc /= peak
    return AudioClip(data=acc, fs=fs)
