"""RIFF/WAVE reader and writer, 16-bit PCM and 32-bit float.

The writer emits the canonical 44-byte header (fmt chunk of 16 bytes
directly followed by data), so a mono 16-bit file is exactly 44 + 2n bytes.
Quantization to PCM scales by 32767 and rounds half away from zero; the
reader mirrors it, so float wavs round-trip bitwise and PCM round-trips
after one quantization.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import WavError
from ..sonify import AudioClip

_FMT_PCM = 1
_FMT_FLOAT = 3
_MAX_DATA_BYTES = 1 << 30


def write_wav(path, clip: AudioClip, bits: int = 16) -> None:
    if bits not in (16, 32):
        raise WavError(f"unsupported bit depth {bits}, expected 16 or 32")
    channels = 2 if clip.stereo else 1
    if bits == 16:
        fmt_tag = _FMT_PCM
        scaled = clip.data * 32767.0
        # round half away from zero, then the clip invariant keeps us in range
        frames = np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)
        payload = frames.astype("<i2").tobytes()
    else:
        fmt_tag = _FMT_FLOAT
        payload = np.ascontiguousarray(clip.data, dtype="<f4").tobytes()
    block_align = channels * bits // 8
    header = b"".join(
        [
            b"RIFF",
            struct.pack("<I", 36 + len(payload)),
            b"WAVE",
            b"fmt ",
            struct.pack(
                "<IHHIIHH",
                16,
                fmt_tag,
                channels,
                clip.fs,
                clip.fs * block_align,
                block_align,
                bits,
            ),
            b"data",
            struct.pack("<I", len(payload)),
        ]
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_wav(path) -> tuple[AudioClip, int]:
    """Read a WAV file; returns (clip, bits). Unknown chunks are skipped."""
    with open(path, "rb") as fh:
        head = fh.read(12)
        if len(head) < 12 or head[:4] != b"RIFF" or head[8:12] != b"WAVE":
            raise WavError("not a RIFF/WAVE file")
        fmt = None
        data = None
        while True:
            chunk_head = fh.read(8)
            if len(chunk_head) < 8:
                break
            cid, size = chunk_head[:4], struct.unpack("<I", chunk_head[4:])[0]
            if size > _MAX_DATA_BYTES:
                raise WavError(f"chunk {cid!r} of {size} bytes exceeds the cap")
            body = fh.read(size)
            if len(body) != size:
                raise WavError(f"truncated chunk {cid!r}: expected {size} bytes, got {len(body)}")
            if size % 2:
                fh.read(1)  # chunks are word-aligned
            if cid == b"fmt ":
                fmt = body
            elif cid == b"data":
                data = body
                if fmt is not None:
                    break
        if fmt is None or data is None:
            raise WavError("missing fmt or data chunk")
        if len(fmt) < 16:
            raise WavError(f"fmt chunk too short ({len(fmt)} bytes)")
        fmt_tag, channels, fs, _rate, _align, bits = struct.unpack("<HHIIHH", fmt[:16])
        if channels not in (1, 2):
            raise WavError(f"unsupported channel count {channels}")
        if fs <= 0:
            raise WavError("bad sample rate")
        if fmt_tag == _FMT_PCM and bits == 16:
            raw = np.frombuffer(data[: len(data) - len(data) % (2 * channels)], dtype="<i2")
            samples = raw.astype(np.float64) / 32767.0
            np.clip(samples, -1.0, 1.0, out=samples)  # -32768 from other writers
        elif fmt_tag == _FMT_FLOAT and bits == 32:
            raw = np.frombuffer(data[: len(data) - len(data) % (4 * channels)], dtype="<f4")
            samples = raw.astype(np.float64)
            if samples.size and np.max(np.abs(samples)) > 1.0 + 1e-6:
                raise WavError("float samples exceed unity")
            np.clip(samples, -1.0, 1.0, out=samples)
        else:
            raise WavError(f"unsupported format tag {fmt_tag} with {bits} bits")
        if channels == 2:
            samples = samples.reshape(-1, 2)
        return AudioClip(data=samples, fs=int(fs)), int(bits)
