"""Image realism statistics: single-scale SSIM, Shannon entropy of the
intensity histogram, histogram overlap, and CLAHE preprocessing."""

from __future__ import annotations

import cv2
import numpy as np
from scipy import ndimage

from ..images import Micrograph

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def _window_mean(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable Gaussian windowing, cropped to fully valid windows."""
    half = kernel.size // 2
    out = ndimage.correlate1d(img, kernel, axis=0, mode="constant")
    out = ndimage.correlate1d(out, kernel, axis=1, mode="constant")
    return out[half:-half, half:-half]


def ssim(a: Micrograph, b: Micrograph) -> float:
    """Mean single-scale SSIM over fully contained 11x11 Gaussian windows.

    Uses sigma = 1.5 and the conventional stabilizers C1 = 0.01^2,
    C2 = 0.03^2 on the [0, 1] intensity range.  Images must be at least
    the window size in both dimensions.
    """
    if a.intensities.shape != b.intensities.shape:
        raise ValueError("images must share dimensions")
    if min(a.intensities.shape) < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW}")
    x = a.intensities
    y = b.intensities
    c1 = SSIM_K1 * SSIM_K1
    c2 = SSIM_K2 * SSIM_K2
    kern = _gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)
    mu_x = _window_mean(x, kern)
    mu_y = _window_mean(y, kern)
    var_x = _window_mean(x * x, kern) - mu_x * mu_x
    var_y = _window_mean(y * y, kern) - mu_y * mu_y
    cov = _window_mean(x * y, kern) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float((num / den).mean())


def _histogram(img: Micrograph, n_bins: int) -> np.ndarray:
    counts, _ = np.histogram(img.intensities, bins=n_bins, range=(0.0, 1.0))
    return counts.astype(np.float64) / img.intensities.size


def shannon_entropy(img: Micrograph, n_bins: int = 256) -> float:
    """Entropy in bits of the n_bins intensity histogram (0*log0 = 0)."""
    p = _histogram(img, n_bins)
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def histogram_overlap(a: Micrograph, b: Micrograph, n_bins: int = 256) -> float:
    """sum_k min(p_k, q_k) over the normalized intensity histograms."""
    return float(np.minimum(_histogram(a, n_bins), _histogram(b, n_bins)).sum())


def clahe(
    img: Micrograph, clip_limit: float = 2.0, tile_grid: tuple[int, int] = (8, 8)
) -> Micrograph:
    """Contrast-limited adaptive histogram equalization.

    Standard CLAHE with bilinear interpolation between per-tile mappings
    (OpenCV backend); operates on the 8-bit quantization of the image.
    Not idempotent by nature.
    """
    arr8 = np.floor(img.intensities * 255.0 + 0.5).astype(np.uint8)
    eq = cv2.createCLAHE(clipLimit=clip_limit, tileGridSize=tile_grid).apply(arr8)
    return Micrograph(eq.astype(np.float64) / 255.0, pixel_scale=img.pixel_scale)
