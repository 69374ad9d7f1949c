"""Frame-stack container: magic, fixed little-endian header, f32 payload.

Layout: 8-byte magic "SWVSTACK", then u32 version, u32 nx, u32 ny,
u32 frame_count, f64 frame_dt, f64 scale, then frame_count*ny*nx float32
values, row-major with y outer and x inner, frames consecutive.  scale
records the normalization multiplier applied to the payload (1.0 if none).
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import StackFormatError
from ..field import GridSpec, ScalarFieldSeries

STACK_MAGIC = b"SWVSTACK"
STACK_VERSION = 1

_HEADER = struct.Struct("<8sIIIIdd")

# refuse absurd headers before allocating (fuzzed/corrupt input)
_MAX_PAYLOAD_BYTES = 1 << 30


def write_frame_stack(path, series: ScalarFieldSeries, scale: float = 1.0) -> None:
    frames = np.ascontiguousarray(series.frames, dtype="<f4")
    header = _HEADER.pack(
        STACK_MAGIC,
        STACK_VERSION,
        series.grid.nx,
        series.grid.ny,
        series.frame_count,
        series.frame_dt,
        float(scale),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(frames.tobytes())


def read_frame_stack(path) -> tuple[ScalarFieldSeries, float]:
    """Read a stack; returns (series, scale).

    The container stores no physical cell size, so the returned GridSpec
    carries the default cell geometry; nothing downstream of the solver
    consumes it.
    """
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) < _HEADER.size:
            raise StackFormatError(f"truncated header: {len(raw)} bytes, need {_HEADER.size}")
        magic, version, nx, ny, frame_count, frame_dt, scale = _HEADER.unpack(raw)
        if magic != STACK_MAGIC:
            raise StackFormatError(f"bad magic {magic!r}")
        if version != STACK_VERSION:
            raise StackFormatError(f"unsupported version {version}, expected {STACK_VERSION}")
        if nx < 2 or ny < 2 or frame_count < 1:
            raise StackFormatError(f"implausible dimensions {nx}x{ny}x{frame_count}")
        if not (frame_dt > 0) or not np.isfinite(frame_dt):
            raise StackFormatError(f"bad frame_dt {frame_dt}")
        n_bytes = 4 * nx * ny * frame_count
        if n_bytes > _MAX_PAYLOAD_BYTES:
            raise StackFormatError(f"payload of {n_bytes} bytes exceeds the 1 GiB cap")
        payload = fh.read(n_bytes)
        if len(payload) != n_bytes:
            raise StackFormatError(f"truncated payload: expected {n_bytes} bytes, got {len(payload)}")
        if fh.read(1):
            raise StackFormatError("trailing bytes after payload")
    frames = np.frombuffer(payload, dtype="<f4").reshape(frame_count, ny, nx)
    grid = GridSpec(nx=nx, ny=ny)
    return ScalarFieldSeries(grid=grid, frames=frames, frame_dt=frame_dt), scale
