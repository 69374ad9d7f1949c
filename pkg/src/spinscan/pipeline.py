"""End-to-end session runs: simulate, sonify, render, manifest.

The pipeline owns the fixed shape-to-voice assignment (note and stereo
position follow the canonical session order) and the on-disk layout:

    out/
      stacks/<kind>.swvstack
      audio/<kind>.wav
      frames/<kind>/frame_00000.png ...
      manifest.json

Everything below is deterministic for a given Settings value; the manifest
records a digest of those settings so reruns can be told apart from edits.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .field import GridSpec, ScalarFieldSeries, normalize_series
from .formats.images import write_png, write_ppm
from .formats.manifest import SessionManifest, ShapeEntry, save_manifest
from .formats.stack import write_frame_stack
from .formats.wavfile import read_wav, write_wav
from .render import ColorMap, render_heatmap
from .shapes import SESSION_ORDER, SHAPE_KINDS, ShapeMask, rasterize_shape
from .simulate import ExcitationParams, MaterialParams, SimConfig, run_excitation
from .sonify import (
    PAN_POSITIONS,
    PENTATONIC_HZ,
    AudioClip,
    LoopSpec,
    SonifyConfig,
    build_path,
    detect_loop_points,
    pan,
    quantize_scan_frequency,
    scan_synthesize,
)

TOOL_TAG = "spinscan 0.1.0"

NOTE_BY_KIND = dict(zip(SESSION_ORDER, PENTATONIC_HZ))
PAN_BY_KIND = dict(zip(SESSION_ORDER, PAN_POSITIONS))


@dataclass(frozen=True)
class Settings:
    """Flat knob set accepted from config files and --set overrides."""

    scale: float = 1.0
    fs: int = 44100
    path_kind: str = "scanline-pingpong"
    gain: float = 1.0
    upscale: int = 1
    wav_bits: int = 16
    image_format: str = "png"
    periods: int = 50
    frames_per_period: int = 20
    b_static: float = 87e-3
    b_mw: float = 1e-3
    f_mw: float = 9.4e9
    field_angle_deg: float = 25.0
    dt: float | None = None
    edge_field: bool = True
    fast_kernel: bool = True
    shapes: tuple = SESSION_ORDER

    def __post_init__(self):
        if self.scale <= 0:
            raise ParameterError("scale must be positive")
        if self.fs < 8000:
            raise ParameterError("fs below 8 kHz is not supported")
        if self.wav_bits not in (16, 32):
            raise ParameterError("wav_bits must be 16 (PCM) or 32 (float)")
        if self.image_format not in ("png", "ppm"):
            raise ParameterError("image_format must be png or ppm")
        if self.upscale < 1:
            raise ParameterError("upscale must be >= 1")
        bad = [s for s in self.shapes if s not in SHAPE_KINDS]
        if bad:
            raise ParameterError(f"unknown shapes: {', '.join(bad)}")
        if not self.shapes:
            raise ParameterError("shape list is empty")

    def digest(self) -> str:
        doc = asdict(self)
        doc["shapes"] = list(doc["shapes"])
        blob = json.dumps(doc, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(name: str, default, raw: str):
    if isinstance(default, bool):
        low = raw.strip().lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ParameterError(f"{name}: expected a boolean, got {raw!r}")
    if name == "shapes":
        return tuple(s.strip() for s in raw.split(",") if s.strip())
    if name == "dt":
        return None if raw.strip().lower() in ("", "none", "auto") else float(raw)
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float) or default is None:
        return float(raw)
    return raw.strip()


def settings_from_sources(config_path=None, overrides=None) -> Settings:
    """Build Settings from an optional key=value file plus --set pairs.

    Later sources win; unknown keys are rejected rather than ignored so a
    typo cannot silently fall back to a default.
    """
    base = Settings()
    fields = {f: getattr(base, f) for f in base.__dataclass_fields__}
    pairs = []
    if config_path is not None:
        try:
            text = Path(config_path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ParameterError(f"cannot read config file: {exc}") from exc
        for ln, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ParameterError(f"{config_path}:{ln}: expected key=value")
            key, _, value = stripped.partition("=")
            pairs.append((key.strip(), value.strip()))
    for item in overrides or []:
        if "=" not in item:
            raise ParameterError(f"--set needs key=value, got {item!r}")
        key, _, value = item.partition("=")
        pairs.append((key.strip(), value.strip()))

    updates = {}
    for key, value in pairs:
        if key not in fields:
            known = ", ".join(sorted(fields))
            raise ParameterError(f"unknown setting {key!r} (known: {known})")
        try:
            updates[key] = _coerce(key, fields[key], value)
        except ValueError as exc:
            raise ParameterError(f"bad value for {key}: {exc}") from exc
    return replace(base, **updates)


# ---------------------------------------------------------------------------
# stage builders


def build_sim_config(kind: str, settings: Settings) -> SimConfig:
    grid = GridSpec().scaled(settings.scale)
    mask = rasterize_shape(grid, kind)
    angle = math.radians(settings.field_angle_deg)
    excitation = ExcitationParams(
        b_static=settings.b_static,
        field_dir=(math.sin(angle), math.cos(angle)),
        b_mw=settings.b_mw,
        f_mw=settings.f_mw,
        frames_per_period=settings.frames_per_period,
        periods=settings.periods,
    )
    return SimConfig(
        mask=mask,
        material=MaterialParams(),
        excitation=excitation,
        dt=settings.dt,
        edge_field=settings.edge_field,
        use_fast_kernel=settings.fast_kernel,
    )


def sonify_series(
    series: ScalarFieldSeries,
    mask: ShapeMask,
    f0_nominal: float,
    settings: Settings,
    pan_position: float,
) -> tuple[AudioClip, LoopSpec, float]:
    """Normalized series -> (stereo clip, loop points, quantized f0)."""
    f0 = quantize_scan_frequency(f0_nominal, settings.fs)
    path = build_path(mask, settings.path_kind)
    cfg = SonifyConfig(
        f0=f0, fs=settings.fs, fps=series.frame_rate_playback, gain=settings.gain
    )
    mono = scan_synthesize(series, path, cfg)
    loop = detect_loop_points(
        series, cfg, frames_per_period=settings.frames_per_period, mask=mask.inside
    )
    return pan(mono, pan_position), loop, f0


def write_frame_images(
    series: ScalarFieldSeries,
    mask: ShapeMask,
    directory,
    image_format: str = "png",
    upscale: int = 1,
) -> int:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    cmap = ColorMap()
    writer = write_png if image_format == "png" else write_ppm
    ext = image_format
    for k in range(series.frame_count):
        image = render_heatmap(series.frames[k], mask.inside, cmap, upscale)
        writer(directory / f"frame_{k:05d}.{ext}", image)
    return series.frame_count


@dataclass
class ShapeArtifacts:
    """Everything one shape produces, for callers that want the middles too."""

    kind: str
    mask: ShapeMask
    series: ScalarFieldSeries      # normalized m_z frames
    norm_scale: float
    clip: AudioClip                # stereo, panned
    loop: LoopSpec
    f0: float
    entry: ShapeEntry


def run_shape(kind: str, settings: Settings, out_dir, log=None) -> ShapeArtifacts:
    if kind not in SHAPE_KINDS:
        raise ParameterError(f"unknown shape {kind!r}")
    out_dir = Path(out_dir)
    say = log or (lambda _msg: None)

    say(f"[{kind}] simulating")
    cfg = build_sim_config(kind, settings)
    series = run_excitation(cfg)
    norm = normalize_series(series)
    if norm.degenerate:
        say(f"[{kind}] warning: response is all zero")

    stacks = out_dir / "stacks"
    stacks.mkdir(parents=True, exist_ok=True)
    write_frame_stack(stacks / f"{kind}.swvstack", norm.series, scale=norm.scale)

    say(f"[{kind}] sonifying")
    stereo, loop, f0 = sonify_series(
        norm.series, cfg.mask, NOTE_BY_KIND[kind], settings, PAN_BY_KIND[kind]
    )
    audio_dir = out_dir / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)
    write_wav(audio_dir / f"{kind}.wav", stereo, bits=settings.wav_bits)

    say(f"[{kind}] rendering {series.frame_count} frames")
    frames_dir = out_dir / "frames" / kind
    count = write_frame_images(
        norm.series, cfg.mask, frames_dir, settings.image_format, settings.upscale
    )

    entry = ShapeEntry(
        kind=kind,
        audio=f"audio/{kind}.wav",
        fundamental_hz=f0,
        pan=PAN_BY_KIND[kind],
        transient_end=loop.transient_end,
        loop_start=loop.loop_start,
        loop_end=loop.loop_end,
        frames_dir=f"frames/{kind}",
        frame_count=count,
        display_fps=norm.series.frame_rate_playback,
        loop_fallback=loop.fallback,
    )
    return ShapeArtifacts(
        kind=kind,
        mask=cfg.mask,
        series=norm.series,
        norm_scale=norm.scale,
        clip=stereo,
        loop=loop,
        f0=f0,
        entry=entry,
    )


def run_session(settings: Settings, out_dir, log=None) -> SessionManifest:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ordered = [k for k in SESSION_ORDER if k in settings.shapes]
    entries = [run_shape(kind, settings, out_dir, log).entry for kind in ordered]
    manifest = SessionManifest(
        fs=settings.fs,
        shapes=entries,
        tool=TOOL_TAG,
        config_digest=settings.digest(),
    )
    save_manifest(out_dir / "manifest.json", manifest)
    return manifest


# ---------------------------------------------------------------------------
# trigger composition


@dataclass(frozen=True)
class HoldSpec:
    """One keypress: a shape held for a duration, placed on the timeline."""

    kind: str
    start: float     # seconds
    duration: float  # seconds

    def __post_init__(self):
        if self.start < 0 or self.duration <= 0:
            raise ParameterError("hold needs start >= 0 and duration > 0")


def _looped_segment(data: np.ndarray, loop_start: int, loop_end: int, n: int) -> np.ndarray:
    """First n samples of play-once-then-loop playback of a stored clip."""
    idx = np.arange(n, dtype=np.int64)
    span = loop_end - loop_start
    wrapped = loop_start + (idx - loop_start) % span
    return data[np.where(idx < loop_start, idx, wrapped)]


def compose_triggers(manifest: SessionManifest, holds, base_dir) -> tuple[np.ndarray, int]:
    """Mix held voices exactly as a live player would schedule them.

    Each hold plays its shape's clip from the top; once playback reaches
    loop_end it wraps to loop_start for as long as the key stays down.  The
    result is the raw float64 sum (superposition is exact; scaling, if any,
    is the caller's business).
    """
    base = Path(base_dir)
    by_kind = {e.kind: e for e in manifest.shapes}
    holds = list(holds)
    if not holds:
        raise ParameterError("no holds given")
    total = 0
    parts = []
    for hold in holds:
        entry = by_kind.get(hold.kind)
        if entry is None:
            raise ParameterError(f"shape {hold.kind!r} not in manifest")
        clip, _bits = read_wav(base / entry.audio)
        data = clip.data if clip.data.ndim == 2 else clip.data[:, np.newaxis]
        offset = int(round(hold.start * manifest.fs))
        n = int(round(hold.duration * manifest.fs))
        if entry.loop_end > data.shape[0]:
            raise ParameterError(f"{hold.kind}: loop extends past the audio file")
        seg = _looped_segment(data, entry.loop_start, entry.loop_end, n)
        parts.append((offset, seg))
        total = max(total, offset + n)
    out = np.zeros((total, 2))
    for offset, seg in parts:
        if seg.shape[1] == 1:
            seg = np.repeat(seg, 2, axis=1)
        out[offset : offset + seg.shape[0]] += seg
    return out, manifest.fs
