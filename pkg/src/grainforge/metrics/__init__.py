"""Quantitative evaluation: segmentation accuracy, realism statistics,
texture descriptors, and 2D feature embedding."""

from .features import (
    FEATURE_NAMES,
    FeatureVector,
    read_features,
    standardize,
    texture_features,
    write_features,
)
from .realism import clahe, histogram_overlap, shannon_entropy, ssim
from .report import MetricsReport, evaluate_image_pairs, evaluate_mask_pairs
from .segmentation import DEFAULT_BF1_TOLERANCE, boundary_f1, iou, iou_report
from .tsne import (
    Embedding2D,
    conditional_affinities,
    read_embedding,
    tsne,
    write_embedding,
)

__all__ = [
    "DEFAULT_BF1_TOLERANCE",
    "Embedding2D",
    "FEATURE_NAMES",
    "FeatureVector",
    "MetricsReport",
    "boundary_f1",
    "clahe",
    "conditional_affinities",
    "evaluate_image_pairs",
    "evaluate_mask_pairs",
    "histogram_overlap",
    "iou",
    "iou_report",
    "read_embedding",
    "read_features",
    "shannon_entropy",
    "ssim",
    "standardize",
    "texture_features",
    "tsne",
    "write_embedding",
]
