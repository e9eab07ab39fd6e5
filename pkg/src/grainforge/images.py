"""Core raster types shared across the pipeline: scalar micrographs,
binary segmentation masks, and integer grain-instance maps, plus their
PNG conventions (8-bit grayscale for intensities and masks, 16-bit
grayscale for instance labels)."""

from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np
from PIL import Image


@dataclasses.dataclass
class Micrograph:
    """2D scalar image with intensities in [0, 1].

    pixel_scale is the physical edge length of one pixel (um/px) when
    known, None otherwise.
    """

    intensities: np.ndarray
    pixel_scale: float | None = None

    def __post_init__(self):
        self.intensities = np.asarray(self.intensities, dtype=np.float64)
        if self.intensities.ndim != 2:
            raise ValueError("micrograph must be a 2D array")
        lo, hi = float(self.intensities.min()), float(self.intensities.max())
        if lo < 0.0 or hi > 1.0:
            raise ValueError(f"intensities outside [0, 1]: min={lo}, max={hi}")

    @property
    def height(self) -> int:
        return self.intensities.shape[0]

    @property
    def width(self) -> int:
        return self.intensities.shape[1]

    def save_png(self, path: str | Path) -> None:
        """Write as 8-bit grayscale PNG, intensity*255 rounded half-up."""
        q = np.floor(self.intensities * 255.0 + 0.5).astype(np.uint8)
        Image.fromarray(q, mode="L").save(Path(path), format="PNG")

    @classmethod
    def load_png(cls, path: str | Path, pixel_scale: float | None = None) -> "Micrograph":
        arr = np.asarray(Image.open(Path(path)).convert("L"), dtype=np.float64)
        return cls(arr / 255.0, pixel_scale=pixel_scale)


@dataclasses.dataclass
class SegmentationMask:
    """Binary per-pixel class map: boundary = 1, interior = 0."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise ValueError("mask must be a 2D array")
        vals = np.unique(arr)
        if not np.isin(vals, (0, 1)).all():
            raise ValueError("mask values must be 0 or 1")
        self.data = arr.astype(np.uint8)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def boundary_fraction(self) -> float:
        return float(self.data.mean())

    def save_png(self, path: str | Path) -> None:
        """Write as 8-bit PNG with values {0, 255}."""
        Image.fromarray(self.data * np.uint8(255), mode="L").save(Path(path), format="PNG")

    @classmethod
    def load_png(cls, path: str | Path) -> "SegmentationMask":
        arr = np.asarray(Image.open(Path(path)).convert("L"))
        return cls((arr > 127).astype(np.uint8))


@dataclasses.dataclass
class InstanceMap:
    """Per-pixel grain identifier.

    Nonzero IDs form the contiguous set 1..K; 0 is reserved for
    unassigned pixels (e.g. boundary pixels of a connected-component
    labelling). K may be 0 for an all-unassigned map.
    """

    labels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.labels)
        if arr.ndim != 2:
            raise ValueError("instance map must be a 2D array")
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError("instance labels must be integers")
        if arr.size and arr.min() < 0:
            raise ValueError("instance labels must be non-negative")
        ids = np.unique(arr)
        ids = ids[ids > 0]
        if ids.size and (ids[0] != 1 or ids[-1] != ids.size):
            raise ValueError("nonzero instance IDs must be contiguous 1..K")
        self.labels = arr.astype(np.int32)

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def n_instances(self) -> int:
        m = int(self.labels.max()) if self.labels.size else 0
        return m

    def save_png(self, path: str | Path) -> None:
        """Write as 16-bit grayscale PNG, label = pixel value."""
        if self.labels.max() > 0xFFFF:
            raise ValueError("instance IDs exceed 16-bit PNG capacity")
        arr = self.labels.astype("<u2")
        Image.fromarray(arr, mode="I;16").save(Path(path), format="PNG")

    @classmethod
    def load_png(cls, path: str | Path) -> "InstanceMap":
        img = Image.open(Path(path))
        arr = np.asarray(img)
        if arr.dtype.kind == "f":
            raise ValueError(f"{path}: not an integer-typed PNG")
        return cls(arr.astype(np.int32))


def relabel_contiguous(labels: np.ndarray) -> np.ndarray:
    """Compact nonzero labels to 1..K preserving ascending ID order."""
    out = np.zeros_like(labels, dtype=np.int32)
    ids = np.unique(labels)
    ids = ids[ids > 0]
    if ids.size:
        rank = np.searchsorted(ids, labels)
        keep = labels > 0
        out[keep] = rank[keep] + 1
    return out
