"""Binary and text containers used at module boundaries."""

from .stack import read_frame_stack, write_frame_stack, STACK_MAGIC, STACK_VERSION
from .ovf import read_ovf, ovf_mz, write_ovf
from .wavfile import AudioClip, read_wav, write_wav
from .images import write_ppm, write_pbm, write_png
from .manifest import SessionManifest, ShapeEntry, load_manifest, save_manifest, validate_manifest

__all__ = [
    "read_frame_stack", "write_frame_stack", "STACK_MAGIC", "STACK_VERSION",
    "read_ovf", "ovf_mz", "write_ovf",
    "AudioClip", "read_wav", "write_wav",
    "write_ppm", "write_pbm", "write_png",
    "SessionManifest", "ShapeEntry", "load_manifest", "save_manifest", "validate_manifest",
]
