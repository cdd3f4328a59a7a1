"""Python access to the eyevis imaging and evaluation core."""

import json as _json

from ._eyevis import (
    BLACK_RANGE,
    BLUE_FACTOR,
    PINK_RANGE,
    Error,
    __version__,
    aggregate_ratios,
    analyze,
    hsv_distance,
    hsv_to_rgb,
    overlap,
    participant_stats,
    rasterize_polygon,
    read_image,
    residue_ratio,
    rgb_to_hsv,
    segment_paint,
    write_image,
)
from ._eyevis import evaluate_corpus as _evaluate_corpus


def evaluate_corpus(corpus, landmarks=None, workers=1):
    """Run the overlap evaluation over an annotated corpus; returns the report dict."""
    import os

    if landmarks is None:
        landmarks = os.path.join(corpus, "landmarks")
    return _json.loads(_evaluate_corpus(corpus, landmarks, workers))


__all__ = [
    "BLACK_RANGE",
    "BLUE_FACTOR",
    "PINK_RANGE",
    "Error",
    "__version__",
    "aggregate_ratios",
    "analyze",
    "evaluate_corpus",
    "hsv_distance",
    "hsv_to_rgb",
    "overlap",
    "participant_stats",
    "rasterize_polygon",
    "read_image",
    "residue_ratio",
    "rgb_to_hsv",
    "segment_paint",
    "write_image",
]
