"""Session manifest: the JSON contract between the pipeline and players.

All paths are relative to the manifest's directory.  Loop points are sample
indices into the referenced audio file.  Creation metadata is limited to
the tool version and a config digest so reruns stay byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import ManifestError

MANIFEST_VERSION = 1


@dataclass
class ShapeEntry:
    kind: str
    audio: str
    fundamental_hz: float
    pan: float
    transient_end: int
    loop_start: int
    loop_end: int
    frames_dir: str
    frame_count: int
    display_fps: float
    loop_fallback: bool = False


@dataclass
class SessionManifest:
    fs: int
    shapes: list[ShapeEntry] = field(default_factory=list)
    version: int = MANIFEST_VERSION
    tool: str = ""
    config_digest: str = ""

    def to_json(self) -> str:
        doc = {
            "version": self.version,
            "tool": self.tool,
            "config_digest": self.config_digest,
            "fs": self.fs,
            "shapes": [asdict(s) for s in self.shapes],
        }
        return json.dumps(doc, indent=2) + "\n"


_REQUIRED_TOP = ("version", "fs", "shapes")
_REQUIRED_SHAPE = (
    "kind",
    "audio",
    "fundamental_hz",
    "pan",
    "transient_end",
    "loop_start",
    "loop_end",
    "frames_dir",
    "frame_count",
    "display_fps",
)


def save_manifest(path, manifest: SessionManifest) -> None:
    Path(path).write_text(manifest.to_json(), encoding="utf-8")


def load_manifest(path) -> SessionManifest:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot read manifest: {exc}") from exc
    missing = [k for k in _REQUIRED_TOP if k not in doc]
    if missing:
        raise ManifestError(f"manifest missing fields: {', '.join(missing)}")
    shapes = []
    for idx, raw in enumerate(doc["shapes"]):
        absent = [k for k in _REQUIRED_SHAPE if k not in raw]
        if absent:
            raise ManifestError(f"shape entry {idx} missing fields: {', '.join(absent)}")
        shapes.append(
            ShapeEntry(
                kind=raw["kind"],
                audio=raw["audio"],
                fundamental_hz=float(raw["fundamental_hz"]),
                pan=float(raw["pan"]),
                transient_end=int(raw["transient_end"]),
                loop_start=int(raw["loop_start"]),
                loop_end=int(raw["loop_end"]),
                frames_dir=raw["frames_dir"],
                frame_count=int(raw["frame_count"]),
                display_fps=float(raw["display_fps"]),
                loop_fallback=bool(raw.get("loop_fallback", False)),
            )
        )
    return SessionManifest(
        fs=int(doc["fs"]),
        shapes=shapes,
        version=int(doc["version"]),
        tool=doc.get("tool", ""),
        config_digest=doc.get("config_digest", ""),
    )


def validate_manifest(path) -> SessionManifest:
    """Load and cross-check a manifest against the files it references."""
    from .wavfile import read_wav

    manifest = load_manifest(path)
    base = Path(path).parent
    if manifest.version != MANIFEST_VERSION:
        raise ManifestError(f"unsupported manifest version {manifest.version}")
    if manifest.fs <= 0:
        raise ManifestError("fs must be positive")
    problems = []
    for entry in manifest.shapes:
        audio_path = base / entry.audio
        frames_dir = base / entry.frames_dir
        if not audio_path.is_file():
            problems.append(f"{entry.kind}: missing audio file {entry.audio}")
            continue
        if not frames_dir.is_dir():
            problems.append(f"{entry.kind}: missing frames dir {entry.frames_dir}")
        clip, _bits = read_wav(audio_path)
        if clip.fs != manifest.fs:
            problems.append(f"{entry.kind}: audio fs {clip.fs} != session fs {manifest.fs}")
        if not (0 <= entry.transient_end <= entry.loop_start < entry.loop_end <= clip.n_samples):
            problems.append(
                f"{entry.kind}: loop points {entry.transient_end}/{entry.loop_start}/"
                f"{entry.loop_end} inconsistent with {clip.n_samples} samples"
            )
        if not (0.0 <= entry.pan <= 1.0):
            problems.append(f"{entry.kind}: pan {entry.pan} outside [0, 1]")
        if entry.display_fps <= 0:
            problems.append(f"{entry.kind}: bad display fps {entry.display_fps}")
    if problems:
        raise ManifestError("; ".join(problems))
    return manifest
