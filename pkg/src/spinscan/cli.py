"""Command line front end.

Exit codes: 0 success, 2 bad parameters or usage, 3 unreadable or
inconsistent input data.  Progress goes to stderr; --json-status puts a
machine-readable result on stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import pipeline as pl
from .errors import DataError, ParameterError
from .field import VectorField, normalize_series
from .formats.images import write_png, write_ppm
from .formats.manifest import load_manifest, validate_manifest
from .formats.ovf import read_ovf, write_ovf
from .formats.stack import read_frame_stack, write_frame_stack
from .formats.wavfile import write_wav
from .render import ColorMap, render_animation, render_heatmap, render_ridgeline
from .shapes import SHAPE_KINDS, ShapeMask
from .simulate import run_excitation
from .sonify import AudioClip, SonifyConfig, build_path, detect_loop_points, pan, \
    quantize_scan_frequency, scan_synthesize


def mask_from_series(series) -> ShapeMask:
    """Recover the cell mask from a stack: out-of-mask cells are exact zeros."""
    inside = np.any(series.frames != 0, axis=0)
    return ShapeMask(grid=series.grid, inside=inside, kind="custom", params=None)


def _default_out(name: str) -> Path:
    base = os.environ.get("SPINSCAN_OUT")
    return Path(base) / name if base else Path(name)


def _log(args):
    if args.quiet:
        return lambda _msg: None
    return lambda msg: print(msg, file=sys.stderr)


def _emit(args, doc: dict, human: list) -> None:
    if args.json_status:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        for line in human:
            print(line)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="key=value settings file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one setting (repeatable)")
    p.add_argument("--json-status", action="store_true",
                   help="print a JSON result to stdout")
    p.add_argument("--quiet", action="store_true", help="suppress progress output")


def _settings(args) -> pl.Settings:
    return pl.settings_from_sources(args.config, args.set)


def _resolve_frame(index: int, count: int) -> int:
    k = index + count if index < 0 else index
    if not (0 <= k < count):
        raise ParameterError(f"frame {index} outside the stack of {count}")
    return k


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    settings = _settings(args)
    cfg = pl.build_sim_config(args.shape, settings)
    log = _log(args)
    log(f"[{args.shape}] {cfg.grid.nx}x{cfg.grid.ny} cells, "
        f"{cfg.excitation.frame_count} frames, dt={cfg.dt_effective:.3e}s")
    series = run_excitation(cfg)
    norm = normalize_series(series)

    out = Path(args.out) if args.out else _default_out(f"{args.shape}.swvstack")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_frame_stack(out, norm.series, scale=norm.scale)

    exported = None
    if args.export_ovf is not None:
        k = _resolve_frame(args.export_ovf, norm.series.frame_count)
        m = np.zeros((cfg.grid.ny, cfg.grid.nx, 3))
        m[:, :, 2] = norm.series.frames[k]
        field = VectorField(grid=cfg.grid, m=m, mask=cfg.mask.inside)
        exported = out.with_suffix(f".f{k:05d}.ovf")
        write_ovf(exported, field)

    doc = {
        "command": "simulate",
        "shape": args.shape,
        "stack": str(out),
        "frames": norm.series.frame_count,
        "cells": cfg.mask.cell_count,
        "norm_scale": norm.scale,
        "degenerate": norm.degenerate,
        "ovf": str(exported) if exported else None,
    }
    _emit(args, doc, [f"wrote {out} ({norm.series.frame_count} frames)"])
    return 0


def cmd_sonify(args) -> int:
    settings = _settings(args)
    series, _scale = read_frame_stack(args.stack)
    mask = mask_from_series(series)

    if args.note is not None:
        notes = pl.PENTATONIC_HZ
        if not (0 <= args.note < len(notes)):
            raise ParameterError(f"--note must be 0..{len(notes) - 1}")
        f0_nominal = notes[args.note]
    else:
        f0_nominal = args.f0
    f0 = quantize_scan_frequency(f0_nominal, settings.fs)

    path = build_path(mask, settings.path_kind)
    cfg = SonifyConfig(f0=f0, fs=settings.fs, fps=series.frame_rate_playback,
                       gain=settings.gain)
    mono = scan_synthesize(series, path, cfg)
    loop = detect_loop_points(series, cfg, settings.frames_per_period, mask.inside)
    stereo = pan(mono, args.pan)

    out = Path(args.out) if args.out else _default_out(Path(args.stack).stem + ".wav")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_wav(out, stereo, bits=settings.wav_bits)

    doc = {
        "command": "sonify",
        "wav": str(out),
        "f0_hz": f0,
        "fs": settings.fs,
        "n_samples": stereo.n_samples,
        "transient_end": loop.transient_end,
        "loop_start": loop.loop_start,
        "loop_end": loop.loop_end,
        "loop_fallback": loop.fallback,
    }
    _emit(args, doc, [
        f"wrote {out} ({stereo.n_samples / settings.fs:.2f}s at {f0:.3f} Hz)",
        f"loop {loop.loop_start}..{loop.loop_end}"
        + (" (fallback)" if loop.fallback else ""),
    ])
    return 0


def _writer_for(fmt: str):
    return write_png if fmt == "png" else write_ppm


def cmd_render(args) -> int:
    settings = _settings(args)
    fmt = args.format or settings.image_format
    if fmt not in ("png", "ppm"):
        raise ParameterError("image format must be png or ppm")

    if args.ovf:
        field = read_ovf(args.ovf)
        frames = field.m[np.newaxis, :, :, 2]
        inside = field.mask
        count = 1
        source = Path(args.ovf)
        series = None
    else:
        series, _scale = read_frame_stack(args.stack)
        frames = series.frames
        inside = mask_from_series(series).inside
        count = series.frame_count
        source = Path(args.stack)

    cmap = ColorMap()
    if args.mode == "animation":
        if series is None:
            raise ParameterError("animation needs a frame stack, not a single OVF")
        out_dir = Path(args.out) if args.out else _default_out(source.stem + "_anim")
        out_dir.mkdir(parents=True, exist_ok=True)
        anim = render_animation(series, inside, cmap, settings.upscale)
        writer = _writer_for(fmt)
        for k, image in enumerate(anim):
            writer(out_dir / f"frame_{k:05d}.{fmt}", image)
        doc = {"command": "render", "mode": "animation", "dir": str(out_dir),
               "frames": anim.frame_count, "fps": anim.fps}
        _emit(args, doc, [f"wrote {anim.frame_count} frames to {out_dir} "
                          f"(play at {anim.fps:g} fps)"])
        return 0

    k = _resolve_frame(args.frame, count)
    if args.mode == "heatmap":
        image = render_heatmap(frames[k], inside, cmap, settings.upscale)
    else:
        image = render_ridgeline(frames[k], inside, rows=args.rows,
                                 width=args.width, height=args.height)
    out = Path(args.out) if args.out else _default_out(
        f"{source.stem}_{args.mode}_{k:05d}.{fmt}")
    out.parent.mkdir(parents=True, exist_ok=True)
    _writer_for(fmt)(out, image)
    doc = {"command": "render", "mode": args.mode, "image": str(out), "frame": k}
    _emit(args, doc, [f"wrote {out}"])
    return 0


def cmd_pipeline(args) -> int:
    settings = _settings(args)
    out_dir = Path(args.out) if args.out else _default_out("session")
    manifest = pl.run_session(settings, out_dir, log=_log(args))
    validate_manifest(out_dir / "manifest.json")
    doc = {
        "command": "pipeline",
        "manifest": str(out_dir / "manifest.json"),
        "fs": manifest.fs,
        "shapes": [
            {
                "kind": e.kind,
                "f0_hz": e.fundamental_hz,
                "pan": e.pan,
                "loop": [e.loop_start, e.loop_end],
                "loop_fallback": e.loop_fallback,
                "frames": e.frame_count,
            }
            for e in manifest.shapes
        ],
    }
    _emit(args, doc, [f"wrote {out_dir / 'manifest.json'} "
                      f"({len(manifest.shapes)} shapes)"])
    return 0


def _parse_hold(text: str) -> pl.HoldSpec:
    parts = text.split(":")
    if len(parts) != 3:
        raise ParameterError(f"--hold needs shape:start:duration, got {text!r}")
    kind, start, dur = parts
    if kind not in SHAPE_KINDS:
        raise ParameterError(f"unknown shape {kind!r} in --hold")
    try:
        return pl.HoldSpec(kind=kind, start=float(start), duration=float(dur))
    except ValueError as exc:
        raise ParameterError(f"bad --hold numbers in {text!r}: {exc}") from exc


def cmd_trigger(args) -> int:
    settings = _settings(args)
    manifest = load_manifest(args.manifest)
    holds = [_parse_hold(h) for h in args.hold]
    data, fs = pl.compose_triggers(manifest, holds, Path(args.manifest).parent)
    peak = float(np.max(np.abs(data))) if data.size else 0.0
    scaled = peak > 1.0
    if scaled:
        data = data / peak
    clip = AudioClip(data=data, fs=fs)

    out = Path(args.out) if args.out else _default_out("trigger.wav")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_wav(out, clip, bits=settings.wav_bits)
    doc = {
        "command": "trigger",
        "wav": str(out),
        "n_samples": clip.n_samples,
        "seconds": clip.n_samples / fs,
        "peak": peak,
        "normalized": scaled,
    }
    _emit(args, doc, [f"wrote {out} ({clip.n_samples / fs:.2f}s, peak {peak:.3f})"])
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinscan",
        description="Simulate shaped magnetic strips, scan them into loops, "
                    "render the frames, and compose trigger mixes.",
    )
    parser.add_argument("--version", action="version", version=pl.TOOL_TAG)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one shape and write a frame stack")
    p.add_argument("--shape", required=True, choices=sorted(SHAPE_KINDS))
    p.add_argument("--out", metavar="FILE", help="stack output path (.swvstack)")
    p.add_argument("--export-ovf", type=int, metavar="FRAME",
                   help="also write this frame as an OVF snapshot")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sonify", help="scan a frame stack into a stereo WAV")
    p.add_argument("--stack", required=True, metavar="FILE")
    p.add_argument("--f0", type=float, default=110.0, metavar="HZ",
                   help="nominal fundamental (quantized to fs/round(fs/f0))")
    p.add_argument("--note", type=int, metavar="N",
                   help="pick the Nth stage fundamental instead of --f0")
    p.add_argument("--pan", type=float, default=0.5, help="stereo position in [0, 1]")
    p.add_argument("--out", metavar="FILE")
    _add_common(p)
    p.set_defaults(func=cmd_sonify)

    p = sub.add_parser("render", help="draw heatmaps, ridgelines, or all frames")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--stack", metavar="FILE")
    src.add_argument("--ovf", metavar="FILE")
    p.add_argument("--mode", choices=("heatmap", "ridgeline", "animation"),
                   default="heatmap")
    p.add_argument("--frame", type=int, default=-1,
                   help="frame index, negative counts from the end")
    p.add_argument("--rows", type=int, default=24, help="ridgeline row count")
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=480)
    p.add_argument("--format", choices=("png", "ppm"))
    p.add_argument("--out", metavar="PATH", help="image file, or directory for animation")
    _add_common(p)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("pipeline", help="full session: all shapes to a manifest")
    p.add_argument("--out", metavar="DIR", help="session directory")
    _add_common(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("trigger", help="mix held shapes from a session manifest")
    p.add_argument("--manifest", required=True, metavar="FILE")
    p.add_argument("--hold", action="append", required=True,
                   metavar="SHAPE:START:DURATION",
                   help="hold a shape (seconds); repeatable")
    p.add_argument("--out", metavar="FILE")
    _add_common(p)
    p.set_defaults(func=cmd_trigger)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
