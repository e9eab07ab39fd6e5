"""Instance-level characterization: connected-component labelling of
masks, per-grain shape statistics, size distributions, and growth
kinetics extracted from snapshot series."""

from __future__ import annotations

import csv
import dataclasses
import math
from pathlib import Path

import numpy as np
from scipy import ndimage
from skimage import measure

from .images import InstanceMap, SegmentationMask, relabel_contiguous

_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)

CSV_HEADER = [
    "id", "area_px", "area_physical", "perimeter_px", "circularity",
    "aspect_ratio", "orientation_rad", "centroid_x", "centroid_y",
    "touches_border",
]


@dataclasses.dataclass
class GrainStats:
    """Shape descriptors for one grain.

    area_physical is area_px * pixel_scale^2 when a scale is known, else
    None.  circularity = 4*pi*A/P^2 with the marching-squares perimeter;
    the estimator saturates at 1.1 for sub-resolution grains whose
    contour length is underestimated.  aspect_ratio >= 1 comes from the
    second-moment ellipse; orientation is the major-axis angle in
    [-pi/2, pi/2) measured from the +x axis.
    """

    id: int
    area_px: int
    area_physical: float | None
    perimeter: float
    circularity: float
    aspect_ratio: float
    orientation: float
    centroid: tuple[float, float]
    touches_border: bool


@dataclasses.dataclass
class SizeHistogram:
    bin_edges: np.ndarray
    counts: np.ndarray

    def to_dict(self) -> dict:
        return {"bin_edges": self.bin_edges.tolist(), "counts": self.counts.tolist()}


@dataclasses.dataclass
class KineticsTrajectory:
    """Mean equivalent-disk diameter and its spread per snapshot time."""

    times: list[float]
    mean_size: list[float]
    std_size: list[float]
    grain_count: list[int]

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _first_encounter_order(labels: np.ndarray) -> np.ndarray:
    """Remap labels so IDs follow scanline order of first appearance."""
    flat = labels.ravel()
    ids, first = np.unique(flat, return_index=True)
    keep = ids > 0
    order = np.argsort(first[keep])
    mapping = np.zeros(int(ids.max()) + 1 if ids.size else 1, dtype=np.int32)
    for new, old in enumerate(ids[keep][order], start=1):
        mapping[old] = new
    return mapping[labels]


def connected_components(mask: SegmentationMask, periodic: bool = False) -> InstanceMap:
    """Group interior (0-class) pixels into 4-connected components.

    Component IDs are assigned 1..K in scanline first-encounter order;
    boundary pixels stay 0.  An all-boundary mask yields an empty map.
    With periodic=True, components touching across the image seam are
    merged (the torus the simulation ran on).
    """
    interior = mask.data == 0
    labels, _ = ndimage.label(interior, structure=_FOUR_CONN)
    if periodic and labels.max() > 1:
        uf = _UnionFind(int(labels.max()) + 1)
        top, bot = labels[0, :], labels[-1, :]
        both = (top > 0) & (bot > 0)
        for a, b in zip(top[both], bot[both]):
            uf.union(int(a), int(b))
        left, right = labels[:, 0], labels[:, -1]
        both = (left > 0) & (right > 0)
        for a, b in zip(left[both], right[both]):
            uf.union(int(a), int(b))
        roots = np.array([uf.find(i) for i in range(int(labels.max()) + 1)], dtype=np.int32)
        labels = roots[labels]
    labels = _first_encounter_order(labels)
    return InstanceMap(labels)


def _cyclic_shift(coords: np.ndarray, n: int) -> tuple[np.ndarray, int]:
    """Shift wrapped coordinates so the set is contiguous; returns the
    shifted coordinates and the shift used."""
    present = np.zeros(n, dtype=bool)
    present[coords] = True
    if present.all():
        return coords, 0
    idx = np.flatnonzero(present)
    gaps = np.diff(idx) - 1
    wrap_gap = (idx[0] + n) - idx[-1] - 1
    if gaps.size and gaps.max() > wrap_gap:
        g = int(gaps.argmax())
        shift = n - int(idx[g + 1])
    else:
        shift = n - int(idx[0])
    return (coords + shift) % n, shift


def _perimeter_marching_squares(binary: np.ndarray) -> float:
    """Contour length of the 0.5-level set of a zero-padded binary patch.

    Marching squares walks axis steps (length 1) with diagonal corner
    cuts (length sqrt(2)/2), already avoiding the up-to-sqrt(2)
    overestimate of raw boundary-pixel counting.  The remaining staircase
    bias (~5% high on digitized disks) is halved by one corner-cutting
    pass over the closed polyline before summing segment lengths, which
    brings disk perimeters within ~3% of 2*pi*r while moving polygon
    perimeters by well under 1%.
    """
    padded = np.pad(binary.astype(float), 1)
    total = 0.0
    for contour in measure.find_contours(padded, 0.5):
        if np.array_equal(contour[0], contour[-1]) and contour.shape[0] > 2:
            ring = contour[:-1]
            mid = (ring + np.roll(ring, -1, axis=0)) / 2.0
            contour = np.vstack([mid, mid[:1]])
        seg = np.diff(contour, axis=0)
        total += float(np.sqrt((seg * seg).sum(axis=1)).sum())
    return total


def _ellipse_descriptors(rows: np.ndarray, cols: np.ndarray) -> tuple[float, float]:
    """Aspect ratio and orientation from second central moments.

    The 1/12 term adds the moment of a unit pixel, keeping single-pixel
    and collinear grains finite.
    """
    x = cols - cols.mean()
    y = rows - rows.mean()
    mxx = float((x * x).mean()) + 1.0 / 12.0
    myy = float((y * y).mean()) + 1.0 / 12.0
    mxy = float((x * y).mean())
    common = math.sqrt((mxx - myy) ** 2 + 4.0 * mxy * mxy)
    lam1 = (mxx + myy + common) / 2.0
    lam2 = (mxx + myy - common) / 2.0
    aspect = math.sqrt(lam1 / lam2) if lam2 > 0 else float("inf")
    theta = 0.5 * math.atan2(2.0 * mxy, mxx - myy)
    if theta >= math.pi / 2:
        theta -= math.pi
    elif theta < -math.pi / 2:
        theta += math.pi
    return aspect, theta


def grain_stats(
    instances: InstanceMap,
    pixel_scale: float | None = None,
    periodic: bool = False,
) -> list[GrainStats]:
    """Compute one GrainStats record per instance ID.

    With periodic=True, grains wrapping the image seam are reassembled
    before measuring (their centroid is reported modulo the grid).
    """
    arr = instances.labels
    h, w = arr.shape
    k = instances.n_instances
    stats: list[GrainStats] = []
    rows_all, cols_all = np.nonzero(arr)
    vals = arr[rows_all, cols_all]
    order = np.argsort(vals, kind="stable")
    rows_all, cols_all, vals = rows_all[order], cols_all[order], vals[order]
    bounds = np.searchsorted(vals, np.arange(1, k + 2))
    for gid in range(1, k + 1):
        lo, hi = bounds[gid - 1], bounds[gid]
        rows, cols = rows_all[lo:hi], cols_all[lo:hi]
        area = int(rows.size)
        touches = bool(
            (rows == 0).any() or (rows == h - 1).any()
            or (cols == 0).any() or (cols == w - 1).any()
        )
        r_shift = c_shift = 0
        if periodic:
            rows, r_shift = _cyclic_shift(rows, h)
            cols, c_shift = _cyclic_shift(cols, w)
            touches = False
        r0, r1 = int(rows.min()), int(rows.max())
        c0, c1 = int(cols.min()), int(cols.max())
        sub = np.zeros((r1 - r0 + 1, c1 - c0 + 1), dtype=bool)
        sub[rows - r0, cols - c0] = True
        perim = _perimeter_marching_squares(sub)
        circ = 4.0 * math.pi * area / (perim * perim) if perim > 0 else 0.0
        circ = min(circ, 1.1)
        aspect, theta = _ellipse_descriptors(rows.astype(float), cols.astype(float))
        cx = (float(cols.mean()) - c_shift) % w if periodic else float(cols.mean())
        cy = (float(rows.mean()) - r_shift) % h if periodic else float(rows.mean())
        stats.append(GrainStats(
            id=gid,
            area_px=area,
            area_physical=area * pixel_scale * pixel_scale if pixel_scale else None,
            perimeter=perim,
            circularity=circ,
            aspect_ratio=aspect,
            orientation=theta,
            centroid=(cx, cy),
            touches_border=touches,
        ))
    return stats


def exclude_border(stats: list[GrainStats]) -> list[GrainStats]:
    """Drop grains flagged as touching the image border (standard
    stereological edge correction)."""
    return [s for s in stats if not s.touches_border]


def size_distribution(stats: list[GrainStats], n_bins: int) -> SizeHistogram:
    """Equal-width histogram of grain areas over [min, max]; counts sum
    to the number of grains supplied."""
    if not stats:
        raise ValueError("no grain statistics to bin")
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    areas = np.array([s.area_px for s in stats], dtype=np.float64)
    lo, hi = float(areas.min()), float(areas.max())
    if lo == hi:
        hi = lo + 1.0
    counts, edges = np.histogram(areas, bins=n_bins, range=(lo, hi))
    return SizeHistogram(bin_edges=edges, counts=counts)


def equivalent_diameters(instances: InstanceMap, pixel_scale: float | None = None) -> np.ndarray:
    """Equivalent-disk diameter 2*sqrt(A/pi) for every instance."""
    areas = np.bincount(instances.labels.ravel())[1:].astype(np.float64)
    areas = areas[areas > 0]
    d = 2.0 * np.sqrt(areas / np.pi)
    return d * pixel_scale if pixel_scale else d


def kinetics(
    series: list[tuple[float, InstanceMap]],
    pixel_scale: float | None = None,
) -> KineticsTrajectory:
    """Mean/std equivalent-disk diameter and grain count per snapshot.

    Requires at least two snapshots at strictly increasing times; a
    snapshot with no grains is rejected.
    """
    if len(series) < 2:
        raise ValueError("need at least two snapshots")
    times = [t for t, _ in series]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("snapshot times must be strictly increasing")
    mean_size, std_size, counts = [], [], []
    for t, imap in series:
        d = equivalent_diameters(imap, pixel_scale)
        if d.size == 0:
            raise ValueError(f"snapshot at t={t} contains no grains")
        mean_size.append(float(d.mean()))
        std_size.append(float(d.std()))
        counts.append(int(d.size))
    return KineticsTrajectory(times=list(times), mean_size=mean_size,
                              std_size=std_size, grain_count=counts)


def write_stats_csv(stats: list[GrainStats], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for s in stats:
            writer.writerow([
                s.id, s.area_px,
                "" if s.area_physical is None else f"{s.area_physical:.6g}",
                f"{s.perimeter:.6g}", f"{s.circularity:.6g}",
                f"{s.aspect_ratio:.6g}", f"{s.orientation:.6g}",
                f"{s.centroid[0]:.6g}", f"{s.centroid[1]:.6g}",
                int(s.touches_border),
            ])
