"""Interactive image segmentation with particle competition and cooperation."""

from .engine import EngineConfig, RunStats, StopReason
from .features import FeatureMatrix, FeatureMode, extract_features, z_normalize
from .imgio import (
    IGNORE,
    UNLABELED,
    CutPolygon,
    ImageBuffer,
    LabelMap,
    load_ground_truth,
    load_image,
    load_polygon,
    load_scribbles,
    save_mask,
    save_overlay,
)
from .netbuild import Network, build_network, initial_state, seed_influence
from .pipeline import (
    PipelineConfig,
    SegmentationError,
    SegmentationResult,
    error_rate,
    segment,
)

__version__ = "0.1.0"

__all__ = [
    "EngineConfig",
    "RunStats",
    "StopReason",
    "FeatureMatrix",
    "FeatureMode",
    "extract_features",
    "z_normalize",
    "IGNORE",
    "UNLABELED",
    "CutPolygon",
    "ImageBuffer",
    "LabelMap",
    "load_ground_truth",
    "load_image",
    "load_polygon",
    "load_scribbles",
    "save_mask",
    "save_overlay",
    "Network",
    "build_network",
    "initial_state",
    "seed_influence",
    "PipelineConfig",
    "SegmentationError",
    "SegmentationResult",
    "error_rate",
    "segment",
    "__version__",
]
