"""Minimal OVF 2.0 reader/writer for rectangular meshes.

Reads text and 4-byte binary data segments (the two layouts mumax3 and
OOMMF actually emit for vector fields); 8-byte binary is rejected loudly
rather than half-supported.  Data order is x fastest, then y, then z.
Multi-layer files are averaged over z so the result is a single film plane.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import OvfError
from ..field import GridSpec, VectorField

_CHECK_VALUE_4 = 1234567.0
_MAX_VALUES = 1 << 28  # ~1 GiB of f32, allocation cap for corrupt headers


def _header_value(line: str) -> tuple[str, str]:
    body = line.lstrip("#").strip()
    if ":" not in body:
        return body.lower(), ""
    key, val = body.split(":", 1)
    return key.strip().lower(), val.strip()


def read_ovf(path) -> VectorField:
    """Parse one OVF 2.0 segment into a VectorField (valuedim 3) or a
    scalar wrapped as the z component (valuedim 1)."""
    meta = {}
    data_kind = None
    with open(path, "rb") as fh:
        first = fh.readline()
        if not first.startswith(b"# OOMMF OVF 2"):
            raise OvfError(f"not an OVF 2.0 file (first line {first[:40]!r})")
        while True:
            line = fh.readline()
            if not line:
                raise OvfError("header ended before a data segment")
            try:
                text = line.decode("ascii")
            except UnicodeDecodeError as exc:
                raise OvfError("non-ascii bytes inside header") from exc
            if not text.startswith("#"):
                continue
            key, val = _header_value(text)
            if key.startswith("begin") and "data" in val.lower():
                data_kind = val.lower()
                break
            if val:
                meta[key] = val

        meshtype = meta.get("meshtype", "rectangular")
        if meshtype != "rectangular":
            raise OvfError(f"unsupported meshtype {meshtype!r}, only rectangular is handled")
        try:
            nx = int(meta["xnodes"])
            ny = int(meta["ynodes"])
            nz = int(meta["znodes"])
        except KeyError as exc:
            raise OvfError(f"header missing {exc.args[0]}") from exc
        except ValueError as exc:
            raise OvfError("non-integer node counts in header") from exc
        valuedim = int(meta.get("valuedim", 3))
        if valuedim not in (1, 3):
            raise OvfError(f"valuedim {valuedim} not supported (expected 1 or 3)")
        if min(nx, ny, nz) < 1:
            raise OvfError(f"implausible node counts {nx}x{ny}x{nz}")
        count = nx * ny * nz * valuedim
        if count > _MAX_VALUES:
            raise OvfError("declared data size exceeds the allocation cap")

        if "binary 8" in data_kind:
            raise OvfError("binary 8 data is not supported, re-export as binary 4 or text")
        if "binary 4" in data_kind:
            check = fh.read(4)
            if len(check) < 4:
                raise OvfError("truncated binary segment (no check value)")
            (check_val,) = struct.unpack("<f", check)
            if check_val != _CHECK_VALUE_4:
                raise OvfError(f"check value mismatch: {check_val!r} (expected {_CHECK_VALUE_4})")
            payload = fh.read(4 * count)
            if len(payload) != 4 * count:
                raise OvfError(f"truncated data: expected {4 * count} bytes, got {len(payload)}")
            values = np.frombuffer(payload, dtype="<f4").astype(np.float64)
        elif "text" in data_kind:
            text_vals = []
            for raw in fh:
                if raw.startswith(b"#"):
                    break
                try:
                    text_vals.extend(float(tok) for tok in raw.split())
                except ValueError as exc:
                    raise OvfError(f"bad numeric token in text data: {raw[:60]!r}") from exc
            if len(text_vals) != count:
                raise OvfError(f"text data has {len(text_vals)} values, expected {count}")
            values = np.asarray(text_vals, dtype=np.float64)
        else:
            raise OvfError(f"unsupported data segment {data_kind!r}")

    values = values.reshape(nz, ny, nx, valuedim)  # x fastest, then y, then z
    plane = values.mean(axis=0)
    if valuedim == 1:
        vec = np.zeros((ny, nx, 3))
        vec[:, :, 2] = plane[:, :, 0]
    else:
        vec = plane

    dx = float(meta.get("xstepsize", 10e-9))
    dy = float(meta.get("ystepsize", 10e-9))
    dz = float(meta.get("zstepsize", 25e-9))
    grid = GridSpec(nx=nx, ny=ny, dx=dx, dy=dy, thickness=dz * nz)
    mask = np.linalg.norm(vec, axis=-1) > 0
    return VectorField(grid=grid, m=vec, mask=mask)


def ovf_mz(field: VectorField) -> np.ndarray:
    """Out-of-plane component as a standalone 2D frame."""
    return np.array(field.m[:, :, 2])


def write_ovf(path, field: VectorField, title: str = "spinscan") -> None:
    """Write one binary-4 OVF 2.0 segment (valuedim 3, single layer)."""
    g = field.grid
    lines = [
        "# OOMMF OVF 2.0",
        "# Segment count: 1",
        "# Begin: Segment",
        "# Begin: Header",
        f"# Title: {title}",
        "# meshtype: rectangular",
        "# meshunit: m",
        "# xmin: 0",
        "# ymin: 0",
        "# zmin: 0",
        f"# xmax: {g.nx * g.dx:.9e}",
        f"# ymax: {g.ny * g.dy:.9e}",
        f"# zmax: {g.thickness:.9e}",
        "# valuedim: 3",
        "# valuelabels: m_x m_y m_z",
        "# valueunits: 1 1 1",
        f"# xbase: {g.dx / 2:.9e}",
        f"# ybase: {g.dy / 2:.9e}",
        f"# zbase: {g.thickness / 2:.9e}",
        f"# xnodes: {g.nx}",
        f"# ynodes: {g.ny}",
        "# znodes: 1",
        f"# xstepsize: {g.dx:.9e}",
        f"# ystepsize: {g.dy:.9e}",
        f"# zstepsize: {g.thickness:.9e}",
        "# End: Header",
        "# Begin: Data Binary 4",
    ]
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode("ascii"))
        fh.write(struct.pack("<f", _CHECK_VALUE_4))
        fh.write(np.ascontiguousarray(field.m, dtype="<f4").tobytes())
        fh.write(b"\n# End: Data Binary 4\n# End: Segment\n")
