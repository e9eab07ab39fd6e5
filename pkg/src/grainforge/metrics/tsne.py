"""Exact t-SNE for projecting feature collections to 2D.

Small-corpus implementation with exact pairwise gradients (no tree
approximation): per-point Gaussian bandwidths found by binary search so
every conditional distribution carries log2(perplexity) bits of entropy,
symmetrized affinities, Student-t low-dimensional kernel, and momentum
gradient descent with early exaggeration.
"""

from __future__ import annotations

import csv
import dataclasses
from pathlib import Path

import numpy as np

from .features import FeatureVector

ENTROPY_TOL_BITS = 1e-3
EXAGGERATION = 12.0
MOMENTUM_EARLY = 0.5
MOMENTUM_LATE = 0.8
LEARNING_RATE = 200.0
MIN_GAIN = 0.01
_EPS = 1e-12


@dataclasses.dataclass
class Embedding2D:
    """2D embedding of a feature collection plus the run's knobs.

    kl_history carries the KL divergence per iteration (with the
    exaggeration factored into P during the early phase), mainly for
    convergence diagnostics and tests.
    """

    ids: list[str]
    tags: list[str]
    points: np.ndarray
    perplexity: float
    iterations: int
    seed: int
    kl_history: list[float] = dataclasses.field(default_factory=list, repr=False)

    def __post_init__(self):
        if not np.isfinite(self.points).all():
            raise ValueError("embedding produced non-finite coordinates")
        if self.points.shape != (len(self.ids), 2):
            raise ValueError("points must be (n, 2) matching ids")


def _pairwise_sq_dists(x: np.ndarray) -> np.ndarray:
    sq = (x * x).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.fill_diagonal(d2, 0.0)
    return np.maximum(d2, 0.0)


def _row_entropy_bits(p_row: np.ndarray) -> float:
    nz = p_row[p_row > 0]
    return float(-(nz * np.log2(nz)).sum())


def conditional_affinities(
    x: np.ndarray, perplexity: float, max_steps: int = 64
) -> tuple[np.ndarray, np.ndarray]:
    """Per-row Gaussian affinities calibrated to the target perplexity.

    Returns (P_conditional, row_entropies_bits).  The bandwidth beta_i of
    each row is bisected until the row entropy matches log2(perplexity)
    within ENTROPY_TOL_BITS.
    """
    n = x.shape[0]
    d2 = _pairwise_sq_dists(x)
    target = np.log2(perplexity)
    p = np.zeros((n, n))
    entropies = np.zeros(n)
    for i in range(n):
        di = np.delete(d2[i], i)
        beta, lo, hi = 1.0, 0.0, np.inf
        row = None
        for _ in range(max_steps):
            expo = np.exp(-di * beta)
            total = expo.sum()
            if total <= 0.0:
                # bandwidth collapsed every neighbor to zero; widen
                beta /= 2.0
                hi = beta * 2.0
                continue
            row = expo / total
            h = _row_entropy_bits(row)
            if abs(h - target) <= ENTROPY_TOL_BITS:
                break
            if h > target:
                lo = beta
                beta = beta * 2.0 if hi == np.inf else (beta + hi) / 2.0
            else:
                hi = beta
                beta = (lo + beta) / 2.0
        entropies[i] = _row_entropy_bits(row)
        p[i, :i] = row[:i]
        p[i, i + 1:] = row[i:]
    return p, entropies


def tsne(
    features: list[FeatureVector],
    perplexity: float = 30.0,
    iterations: int = 1000,
    seed: int = 0,
) -> Embedding2D:
    """Embed a feature collection into 2D.

    Requires at least 3*perplexity points (the usual calibration
    constraint) and a shared, finite feature dimension.  Deterministic
    given the seed.
    """
    n = len(features)
    if perplexity < 2:
        raise ValueError("perplexity must be >= 2")
    if n < 3 * perplexity:
        raise ValueError(f"need at least 3*perplexity = {3 * perplexity:.0f} points, got {n}")
    dim = features[0].values.size
    if any(f.values.size != dim for f in features):
        raise ValueError("feature vectors must share dimension")
    x = np.vstack([f.values for f in features])
    if not np.isfinite(x).all():
        raise ValueError("non-finite feature values")

    cond, _ = conditional_affinities(x, perplexity)
    p = (cond + cond.T) / (2.0 * n)
    p = np.maximum(p, _EPS)

    rng = np.random.default_rng(seed)
    y = rng.normal(0.0, 1e-4, size=(n, 2))
    inc = np.zeros_like(y)
    gains = np.ones_like(y)
    exag_until = max(1, iterations // 4)
    kl_history: list[float] = []

    for it in range(iterations):
        p_eff = p * EXAGGERATION if it < exag_until else p
        d2 = _pairwise_sq_dists(y)
        num = 1.0 / (1.0 + d2)
        np.fill_diagonal(num, 0.0)
        q = np.maximum(num / num.sum(), _EPS)
        pq = (p_eff - q) * num
        grad = 4.0 * ((np.diag(pq.sum(axis=1)) - pq) @ y)
        momentum = MOMENTUM_EARLY if it < exag_until else MOMENTUM_LATE
        same_sign = np.sign(grad) == np.sign(inc)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        gains = np.maximum(gains, MIN_GAIN)
        inc = momentum * inc - LEARNING_RATE * gains * grad
        y = y + inc
        y = y - y.mean(axis=0)
        kl_history.append(float((p_eff * np.log(p_eff / q)).sum()))

    return Embedding2D(
        ids=[f.id for f in features],
        tags=[f.tag for f in features],
        points=y,
        perplexity=perplexity,
        iterations=iterations,
        seed=seed,
        kl_history=kl_history,
    )


def write_embedding(emb: Embedding2D, path: str | Path) -> None:
    """CSV with header id,tag,x,y."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "tag", "x", "y"])
        for i, (pid, tag) in enumerate(zip(emb.ids, emb.tags)):
            writer.writerow([pid, tag, f"{emb.points[i, 0]:.10g}", f"{emb.points[i, 1]:.10g}"])


def read_embedding(path: str | Path) -> tuple[list[str], list[str], np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["id", "tag", "x", "y"]:
            raise ValueError(f"{path}: not an embedding file")
        ids, tags, pts = [], [], []
        for row in reader:
            ids.append(row[0])
            tags.append(row[1])
            pts.append((float(row[2]), float(row[3])))
    return ids, tags, np.array(pts)
