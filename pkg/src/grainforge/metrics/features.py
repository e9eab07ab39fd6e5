"""Hand-crafted texture descriptors standing in for deep CNN features,
plus the feature-file CSV schema shared with external embedding
producers.

Vector layout (16 values, fixed order):

    0 mean          4 entropy_bits   8  glcm_contrast_x   12 glcm_contrast_y
    1 std           5 q25            9  glcm_homogeneity_x 13 glcm_homogeneity_y
    2 skewness      6 q50            10 glcm_energy_x      14 glcm_energy_y
    3 kurtosis      7 q75            11 glcm_correlation_x 15 glcm_correlation_y

Histogram statistics use 256 intensity bins; the gray-level
co-occurrence matrices use 32 levels at offsets (1,0) (horizontal
neighbor, "x") and (0,1) (vertical neighbor, "y"), symmetric and
normalized.  Degenerate (constant) images define skewness, kurtosis and
GLCM correlation as 0.
"""

from __future__ import annotations

import csv
import dataclasses
from pathlib import Path

import numpy as np

from ..images import Micrograph
from .realism import shannon_entropy

GLCM_LEVELS = 32
FEATURE_NAMES = [
    "mean", "std", "skewness", "kurtosis", "entropy_bits", "q25", "q50", "q75",
    "glcm_contrast_x", "glcm_homogeneity_x", "glcm_energy_x", "glcm_correlation_x",
    "glcm_contrast_y", "glcm_homogeneity_y", "glcm_energy_y", "glcm_correlation_y",
]


@dataclasses.dataclass
class FeatureVector:
    id: str
    tag: str
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).ravel()
        if not np.isfinite(self.values).all():
            raise ValueError(f"{self.id}: non-finite feature values")


def _quantize(img: np.ndarray, levels: int) -> np.ndarray:
    q = np.floor(img * levels).astype(np.int64)
    return np.clip(q, 0, levels - 1)


def _glcm(quantized: np.ndarray, offset: tuple[int, int], levels: int) -> np.ndarray:
    """Symmetric normalized co-occurrence matrix for one pixel offset."""
    dy, dx = offset
    h, w = quantized.shape
    a = quantized[: h - dy, : w - dx].ravel()
    b = quantized[dy:, dx:].ravel()
    counts = np.bincount(a * levels + b, minlength=levels * levels)
    mat = counts.reshape(levels, levels).astype(np.float64)
    mat = mat + mat.T
    return mat / mat.sum()


def _glcm_props(p: np.ndarray) -> tuple[float, float, float, float]:
    levels = p.shape[0]
    i = np.arange(levels, dtype=np.float64)
    diff = i[:, None] - i[None, :]
    contrast = float((p * diff * diff).sum())
    homogeneity = float((p / (1.0 + diff * diff)).sum())
    energy = float(np.sqrt((p * p).sum()))
    mu_i = float((p.sum(axis=1) * i).sum())
    mu_j = float((p.sum(axis=0) * i).sum())
    var_i = float((p.sum(axis=1) * (i - mu_i) ** 2).sum())
    var_j = float((p.sum(axis=0) * (i - mu_j) ** 2).sum())
    if var_i <= 0.0 or var_j <= 0.0:
        correlation = 0.0
    else:
        correlation = float(
            ((i[:, None] - mu_i) * (i[None, :] - mu_j) * p).sum()
            / np.sqrt(var_i * var_j)
        )
    return contrast, homogeneity, energy, correlation


def texture_features(img: Micrograph, id: str = "", tag: str = "") -> FeatureVector:
    """16-dimensional descriptor of intensity distribution and texture."""
    arr = img.intensities
    if min(arr.shape) < 32:
        raise ValueError("image must be at least 32x32")
    mean = float(arr.mean())
    std = float(arr.std())
    if std > 0.0:
        z = (arr - mean) / std
        skewness = float((z ** 3).mean())
        kurtosis = float((z ** 4).mean()) - 3.0
    else:
        skewness = 0.0
        kurtosis = 0.0
    q25, q50, q75 = (float(v) for v in np.percentile(arr, [25, 50, 75]))
    entropy = shannon_entropy(img)
    quant = _quantize(arr, GLCM_LEVELS)
    vals = [mean, std, skewness, kurtosis, entropy, q25, q50, q75]
    for offset in ((0, 1), (1, 0)):  # (dy, dx): horizontal then vertical step
        vals.extend(_glcm_props(_glcm(quant, offset, GLCM_LEVELS)))
    return FeatureVector(id=id, tag=tag, values=np.array(vals))


def standardize(features: list[FeatureVector]) -> list[FeatureVector]:
    """Zero-mean unit-variance columns across the collection (constant
    columns are left centered); recommended before distance-based
    embedding since raw descriptor scales span orders of magnitude."""
    mat = np.vstack([f.values for f in features])
    mu = mat.mean(axis=0)
    sd = mat.std(axis=0)
    sd[sd == 0.0] = 1.0
    mat = (mat - mu) / sd
    return [
        FeatureVector(f.id, f.tag, row) for f, row in zip(features, mat)
    ]


# ---------------------------------------------------------------------------
# Feature-file CSV schema: header "id,tag,f0,...,fD"; external producers
# (e.g. CNN embedding exporters) write the same layout with their own D.

def write_features(features: list[FeatureVector], path: str | Path) -> None:
    if not features:
        raise ValueError("no features to write")
    dim = features[0].values.size
    for f in features:
        if f.values.size != dim:
            raise ValueError("feature vectors must share dimension")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "tag"] + [f"f{i}" for i in range(dim)])
        for f in features:
            writer.writerow([f.id, f.tag] + [f"{v:.10g}" for v in f.values])


def read_features(path: str | Path) -> list[FeatureVector]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["id", "tag"] or any(
            c != f"f{i}" for i, c in enumerate(header[2:])
        ):
            raise ValueError(f"{path}: not a feature file (header {header[:4]}...)")
        dim = len(header) - 2
        out = []
        for row in reader:
            if len(row) != dim + 2:
                raise ValueError(f"{path}: row width {len(row)} != {dim + 2}")
            out.append(FeatureVector(row[0], row[1], np.array([float(v) for v in row[2:]])))
    return out
