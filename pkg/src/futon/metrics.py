"""PSNR, SSIM and IoU.

Model outputs live in ``[-1, 1]``; callers remap them with
:func:`to_unit_range` before computing PSNR/SSIM at unit peak.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, ShapeError

__all__ = ["psnr", "ssim", "iou", "gaussian_window", "to_unit_range", "from_unit_range"]


def to_unit_range(x) -> np.ndarray:
    return (np.asarray(x, dtype=np.float64) + 1.0) / 2.0


def from_unit_range(x) -> np.ndarray:
    return 2.0 * np.asarray(x, dtype=np.float64) - 1.0


def _same_shape(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def psnr(a, b, peak: float = 1.0) -> float:
    """``10 log10(peak^2 / MSE)`` over all elements; ``inf`` when the inputs match."""
    if peak <= 0:
        raise DomainError(f"peak must be positive, got {peak!r}")
    a, b = _same_shape(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    """Normalized 1-D Gaussian taps."""
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def _filter_valid(img: np.ndarray, g: np.ndarray) -> np.ndarray:
    # Separable correlation, 'valid' region only.
    n = g.size
    rows = sum(g[k] * img[k : img.shape[0] - n + 1 + k, :] for k in range(n))
    return sum(g[k] * rows[:, k : rows.shape[1] - n + 1 + k] for k in range(n))


def ssim(a, b, peak: float = 1.0, window: int = 11, sigma: float = 1.5) -> float:
    """Mean SSIM with a Gaussian window, averaged over channels.

    Accepts ``(H, W)`` or ``(H, W, D)``. Statistics are taken over the
    'valid' window positions only (no padding).
    """
    a, b = _same_shape(a, b)
    if a.ndim == 2:
        a, b = a[..., None], b[..., None]
    if a.ndim != 3:
        raise ShapeError(f"ssim expects 2-D images, got shape {a.shape}")
    if a.shape[0] < window or a.shape[1] < window:
        raise ShapeError(f"image {a.shape[:2]} is smaller than the {window}x{window} window")
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2
    g = gaussian_window(window, sigma)
    vals = []
    for d in range(a.shape[2]):
        x, y = a[..., d], b[..., d]
        mx, my = _filter_valid(x, g), _filter_valid(y, g)
        sxx = _filter_valid(x * x, g) - mx * mx
        syy = _filter_valid(y * y, g) - my * my
        sxy = _filter_valid(x * y, g) - mx * my
        num = (2 * mx * my + c1) * (2 * sxy + c2)
        den = (mx * mx + my * my + c1) * (sxx + syy + c2)
        vals.append(float(np.mean(num / den)))
    return float(np.mean(vals))


def iou(pred, gt, threshold: float = 0.0) -> float:
    """Intersection over union of ``pred > threshold`` and ``gt > threshold``; 1 when both are empty."""
    p, g = _same_shape(pred, gt)
    p = p > threshold
    g = g > threshold
    union = np.count_nonzero(p | g)
    if union == 0:
        return 1.0
    return np.count_nonzero(p & g) / union
