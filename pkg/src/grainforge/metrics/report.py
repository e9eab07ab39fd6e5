"""Batch metric evaluation over image/mask pairs and the report schema
written by the CLI (JSON and CSV)."""

from __future__ import annotations

import csv
import dataclasses
import json
from pathlib import Path

import numpy as np

from ..images import Micrograph, SegmentationMask
from .realism import histogram_overlap, shannon_entropy, ssim
from .segmentation import boundary_f1, iou_report


@dataclasses.dataclass
class MetricsReport:
    """Per-item metric values plus their aggregate means.

    entries: one dict per evaluated pair, keyed by metric name.
    aggregate: mean of each metric over entries.
    params: evaluation knobs (e.g. the boundary-F1 tolerance used).
    """

    entries: list[dict]
    aggregate: dict
    params: dict

    @property
    def n_samples(self) -> int:
        return len(self.entries)

    def to_json(self, path: str | Path) -> None:
        payload = {
            "n_samples": self.n_samples,
            "params": self.params,
            "aggregate": self.aggregate,
            "entries": self.entries,
        }
        Path(path).write_text(json.dumps(payload, indent=2))

    def to_csv(self, path: str | Path) -> None:
        if not self.entries:
            Path(path).write_text("")
            return
        keys = list(self.entries[0].keys())
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(keys)
            for e in self.entries:
                writer.writerow([e.get(k, "") for k in keys])


def _aggregate(entries: list[dict]) -> dict:
    agg: dict = {}
    if not entries:
        return agg
    for key in entries[0]:
        vals = [e[key] for e in entries if isinstance(e.get(key), (int, float))]
        if vals and key != "name":
            agg[key] = float(np.mean(vals))
    return agg


def evaluate_mask_pairs(
    pairs: list[tuple[str, SegmentationMask, SegmentationMask]],
    theta: float = 2.0,
) -> MetricsReport:
    """IoU (boundary/interior/mean) and boundary F1 per (name, pred, gt)."""
    entries = []
    for name, pred, gt in pairs:
        e = {"name": name}
        e.update(iou_report(pred, gt))
        e["boundary_f1"] = boundary_f1(pred, gt, theta)
        entries.append(e)
    return MetricsReport(entries=entries, aggregate=_aggregate(entries),
                         params={"bf1_tolerance_px": theta})


def evaluate_image_pairs(
    pairs: list[tuple[str, Micrograph, Micrograph]],
    n_bins: int = 256,
) -> MetricsReport:
    """SSIM, entropies and histogram overlap per (name, image_a, image_b)."""
    entries = []
    for name, a, b in pairs:
        entries.append({
            "name": name,
            "ssim": ssim(a, b),
            "entropy_bits_a": shannon_entropy(a, n_bins),
            "entropy_bits_b": shannon_entropy(b, n_bins),
            "histogram_overlap": histogram_overlap(a, b, n_bins),
        })
    return MetricsReport(entries=entries, aggregate=_aggregate(entries),
                         params={"n_bins": n_bins})
