"""Computational ghost imaging with a single-pixel (bucket) detector.

Simulate seeded binary speckle illumination, a bucket detector behind an
arbitrary optical channel (ground glass, a diffuse wall around a corner), and
reconstruct the object from second-order intensity correlations.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DegenerateError,
    DimensionError,
    FileFormatError,
    GhostcamError,
    TruncatedFileError,
)
from .patterns import (  # noqa: E402
    FillMode,
    PatternGridSpec,
    SpecklePattern,
    generate_pattern,
    load_patterns,
    pattern_stream,
    save_patterns,
)
from .forward import (  # noqa: E402
    ChannelSpec,
    DetectorTrace,
    ObjectMap,
    ObjectMode,
    bucket_signal,
    load_object_image,
    make_glyph_object,
    make_toy_target,
    save_object_image,
    simulate_trace,
)
from .reconstruct import (  # noqa: E402
    CorrelationAccumulator,
    ReconstructedImage,
    finalize_fluctuation_image,
    finalize_g2,
    merge,
    normalize_for_display,
)
from .pipeline import Scenario, acquire, accumulate_trace  # noqa: E402
from .metrics import (  # noqa: E402
    ConvergenceCurve,
    RegionMask,
    SnrReport,
    compute_snr,
    convergence_curve,
    fidelity,
    mask_from_object,
)
