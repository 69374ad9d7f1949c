"""Spin-wave strips turned into loopable instrument voices.

Shaped micrometer strips are driven with a microwave field, the out-of-plane
response is recorded as frame stacks, and a scanning path reads those frames
back as audio.  Subpackages: simulate (dynamics), sonify (scanned synthesis),
render (images), formats (stack/OVF/WAV/manifest I/O), pipeline + cli (glue).
"""

__version__ = "0.1.0"

from .errors import (
    DataError,
    IntegrationError,
    ManifestError,
    OvfError,
    ParameterError,
    RelaxationError,
    SpinscanError,
    StackFormatError,
    WavError,
)
from .field import (
    GridSpec,
    NormalizeResult,
    ScalarFieldSeries,
    VectorField,
    normalize_series,
    sample_bilinear,
    sample_trilinear,
)
from .shapes import SESSION_ORDER, SHAPE_KINDS, ShapeMask, rasterize_shape, shape_presets
from .simulate import (
    ExcitationParams,
    MaterialParams,
    RelaxResult,
    SimConfig,
    dt_stability_cap,
    effective_field,
    initial_state,
    llg_rhs,
    relax,
    run_excitation,
    step,
)
from .sonify import (
    PAN_POSITIONS,
    PENTATONIC_HZ,
    AudioClip,
    LoopSpec,
    SamplingPath,
    SonifyConfig,
    build_path,
    detect_loop_points,
    mix,
    pan,
    quantize_scan_frequency,
    samples_per_cycle,
    scan_synthesize,
)
from .render import AnimationFrames, ColorMap, render_animation, render_heatmap, render_ridgeline
from .pipeline import (
    HoldSpec,
    Settings,
    ShapeArtifacts,
    compose_triggers,
    run_session,
    run_shape,
    settings_from_sources,
)

__all__ = [name for name in dir() if not name.startswith("_")]
