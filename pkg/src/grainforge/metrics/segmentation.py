"""Segmentation accuracy metrics: intersection-over-union and the
distance-tolerant boundary F1 score."""

from __future__ import annotations

import numpy as np
from scipy.ndimage import distance_transform_edt

from ..images import SegmentationMask

DEFAULT_BF1_TOLERANCE = 2.0


def _check_dims(pred: SegmentationMask, gt: SegmentationMask) -> None:
    if pred.data.shape != gt.data.shape:
        raise ValueError(
            f"mask dimensions differ: {pred.data.shape} vs {gt.data.shape}"
        )


def iou(pred: SegmentationMask, gt: SegmentationMask) -> float:
    """IoU of the boundary class; 1.0 when both masks are empty."""
    _check_dims(pred, gt)
    p = pred.data.astype(bool)
    g = gt.data.astype(bool)
    union = int(np.logical_or(p, g).sum())
    if union == 0:
        return 1.0
    return float(np.logical_and(p, g).sum() / union)


def iou_report(pred: SegmentationMask, gt: SegmentationMask) -> dict[str, float]:
    """Boundary-class IoU plus the interior-class IoU and their mean.

    Reported together because "IoU" alone leaves the evaluated class
    ambiguous; downstream consumers pick the entry they need.
    """
    boundary = iou(pred, gt)
    interior = iou(
        SegmentationMask(1 - pred.data), SegmentationMask(1 - gt.data)
    )
    return {
        "iou_boundary": boundary,
        "iou_interior": interior,
        "iou_mean": (boundary + interior) / 2.0,
    }


def boundary_f1(
    pred: SegmentationMask, gt: SegmentationMask, theta: float = DEFAULT_BF1_TOLERANCE
) -> float:
    """F1 over boundary pixels matched within Euclidean distance theta.

    Precision is the fraction of predicted boundary pixels lying within
    theta of any ground-truth boundary pixel (by exact Euclidean distance
    transform); recall is symmetric.  Both masks empty scores 1.0; one
    empty scores 0.0.
    """
    _check_dims(pred, gt)
    if theta < 0:
        raise ValueError("theta must be >= 0")
    p = pred.data.astype(bool)
    g = gt.data.astype(bool)
    if not p.any() and not g.any():
        return 1.0
    if not p.any() or not g.any():
        return 0.0
    dist_to_gt = distance_transform_edt(~g)
    dist_to_pred = distance_transform_edt(~p)
    precision = float((dist_to_gt[p] <= theta).mean())
    recall = float((dist_to_pred[g] <= theta).mean())
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)
