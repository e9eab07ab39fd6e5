"""Initial polycrystal geometry: periodic Voronoi tessellation of random
seed points, regularized by Lloyd iterations until cell areas fall into a
narrow band."""

from __future__ import annotations

import dataclasses

import numpy as np

from .images import InstanceMap

DEFAULT_CV_TARGET = 0.35
DEFAULT_MAX_ITERS = 50

# rows handled per block when scanning all seed distances; keeps the
# (n_seeds, block, width) distance slab cache-sized
_BLOCK_ROWS = 32


@dataclasses.dataclass
class SeedSet:
    """Voronoi generator points in pixel coordinates on a W x H torus."""

    points: np.ndarray
    width: int
    height: int
    rng_seed: int = 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("points must be an (N, 2) array of (x, y)")
        if pts.shape[0] < 1:
            raise ValueError("need at least one seed")
        if (pts[:, 0] < 0).any() or (pts[:, 0] >= self.width).any() \
                or (pts[:, 1] < 0).any() or (pts[:, 1] >= self.height).any():
            raise ValueError("seed points must lie inside the domain")
        if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
            raise ValueError("seed points must be pairwise distinct")
        self.points = pts

    @property
    def n_seeds(self) -> int:
        return self.points.shape[0]

    @classmethod
    def random(cls, n_seeds: int, width: int, height: int, rng_seed: int) -> "SeedSet":
        rng = np.random.default_rng(rng_seed)
        while True:
            pts = np.column_stack([
                rng.uniform(0.0, width, size=n_seeds),
                rng.uniform(0.0, height, size=n_seeds),
            ])
            if np.unique(pts, axis=0).shape[0] == n_seeds:
                return cls(pts, width, height, rng_seed)


def _assign_labels(seeds: SeedSet) -> np.ndarray:
    """Nearest-seed label (1-based) per pixel under toroidal distance.

    Pixel centers sit at (col + 0.5, row + 0.5).  np.argmin returns the
    first minimum, so exact distance ties go to the lowest seed ID.
    """
    w, h = seeds.width, seeds.height
    xs = np.arange(w) + 0.5
    ys = np.arange(h) + 0.5
    sx = seeds.points[:, 0][:, None]
    sy = seeds.points[:, 1][:, None]
    dxa = np.abs(xs[None, :] - sx)
    dx2 = np.minimum(dxa, w - dxa) ** 2          # (n, W)
    dya = np.abs(ys[None, :] - sy)
    dy2 = np.minimum(dya, h - dya) ** 2          # (n, H)
    labels = np.empty((h, w), dtype=np.int32)
    for r0 in range(0, h, _BLOCK_ROWS):
        r1 = min(r0 + _BLOCK_ROWS, h)
        block = dy2[:, r0:r1, None] + dx2[:, None, :]   # (n, rows, W)
        labels[r0:r1] = block.argmin(axis=0) + 1
    return labels


def voronoi(seeds: SeedSet) -> InstanceMap:
    """Rasterize the periodic Voronoi tessellation of the seed set.

    Every pixel gets the 1-based ID of its nearest seed; ties break to
    the lowest ID.
    """
    return InstanceMap(_assign_labels(seeds))


def _cell_areas(labels: np.ndarray, n_seeds: int) -> np.ndarray:
    return np.bincount(labels.ravel(), minlength=n_seeds + 1)[1:].astype(np.float64)


def area_cv(seeds: SeedSet) -> float:
    """Coefficient of variation (std/mean) of Voronoi cell areas."""
    areas = _cell_areas(_assign_labels(seeds), seeds.n_seeds)
    return float(areas.std() / areas.mean())


def _toroidal_centroids(labels: np.ndarray, n_seeds: int, width: int, height: int) -> np.ndarray:
    """Per-cell centroid on the torus via circular-mean coordinates.

    Mapping each coordinate to an angle avoids wrap-around bias for cells
    that straddle the seam.
    """
    flat = labels.ravel()
    ys, xs = np.divmod(np.arange(flat.size), width)
    tx = (xs + 0.5) * (2.0 * np.pi / width)
    ty = (ys + 0.5) * (2.0 * np.pi / height)
    n = n_seeds + 1
    cx = np.bincount(flat, weights=np.cos(tx), minlength=n)[1:]
    sx = np.bincount(flat, weights=np.sin(tx), minlength=n)[1:]
    cy = np.bincount(flat, weights=np.cos(ty), minlength=n)[1:]
    sy = np.bincount(flat, weights=np.sin(ty), minlength=n)[1:]
    ang_x = np.arctan2(sx, cx) % (2.0 * np.pi)
    ang_y = np.arctan2(sy, cy) % (2.0 * np.pi)
    px = (ang_x * width / (2.0 * np.pi)) % width
    py = (ang_y * height / (2.0 * np.pi)) % height
    return np.column_stack([px, py])


def regularize(
    seeds: SeedSet,
    max_iters: int = DEFAULT_MAX_ITERS,
    cv_target: float = DEFAULT_CV_TARGET,
) -> SeedSet:
    """Lloyd relaxation toward equal-area cells.

    Each iteration moves every seed to the toroidal centroid of its
    current cell, stopping once the coefficient of variation of cell
    areas reaches cv_target or after max_iters iterations.  Seed count is
    preserved; max_iters = 0 returns the input unchanged.
    """
    if max_iters < 0:
        raise ValueError("max_iters must be >= 0")
    current = seeds
    for _ in range(max_iters):
        labels = _assign_labels(current)
        areas = _cell_areas(labels, current.n_seeds)
        if float(areas.std() / areas.mean()) <= cv_target:
            break
        pts = _toroidal_centroids(labels, current.n_seeds, seeds.width, seeds.height)
        current = SeedSet(pts, seeds.width, seeds.height, seeds.rng_seed)
    return current


def generate_structure(
    n_grains: int, width: int, height: int, rng_seed: int,
    max_iters: int = DEFAULT_MAX_ITERS, cv_target: float = DEFAULT_CV_TARGET,
) -> InstanceMap:
    """One regularized tessellation for a given seed."""
    seeds = SeedSet.random(n_grains, width, height, rng_seed)
    return voronoi(regularize(seeds, max_iters=max_iters, cv_target=cv_target))


def generate_corpus(
    n_structures: int, n_grains: int, width: int, height: int, base_seed: int = 0,
    max_iters: int = DEFAULT_MAX_ITERS, cv_target: float = DEFAULT_CV_TARGET,
) -> list[InstanceMap]:
    """Deterministic family of regularized tessellations.

    Structure k uses rng_seed = base_seed + k, so corpora are reproducible
    and individual structures can be regenerated in isolation.
    """
    if n_structures < 1:
        raise ValueError("n_structures must be >= 1")
    return [
        generate_structure(n_grains, width, height, base_seed + k,
                           max_iters=max_iters, cv_target=cv_target)
        for k in range(n_structures)
    ]
