"""Python bindings for the genreforge library."""

import os as _os

# Installed wheels carry the bundled abbreviation lists and lexicons.
_data = _os.path.join(_os.path.dirname(__file__), "data")
if _os.path.isdir(_data):
    _os.environ.setdefault("GENREFORGE_DATA", _data)

from ._genreforge import (
    F1Pair,
    GenreforgeError,
    delta_points,
    depth_ratio,
    encode_sentence,
    f1_pair,
    macro_average,
    metre_pattern,
    pca_project,
    proxy_metaphor_count,
    run_pipeline,
    train_count,
    tree_depths,
    validate_config,
)

__all__ = [
    "F1Pair",
    "GenreforgeError",
    "delta_points",
    "depth_ratio",
    "encode_sentence",
    "f1_pair",
    "macro_average",
    "metre_pattern",
    "pca_project",
    "proxy_metaphor_count",
    "run_pipeline",
    "train_count",
    "tree_depths",
    "validate_config",
]
