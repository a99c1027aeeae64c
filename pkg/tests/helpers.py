"""Synthetic targets shared by the pipeline and acceptance tests."""

import numpy as np

from futon.gfs import grid_coordinates
from futon.metrics import to_unit_range
from futon.model import forward_grid, init_model


def in_class_image(n, K, R, seed, scale, D=1):
    """A [0, 1] image that an ``(K, R)`` tanh model represents exactly."""
    src = init_model(2, K, R, D, activation="tanh", seed=seed)
    src.factors.output_factor *= scale
    return to_unit_range(forward_grid(src, [grid_coordinates(n)] * 2))


def piecewise_constant(n=64):
    img = np.full((n, n), 0.2)
    img[n // 8 : n // 2, n // 8 : 5 * n // 8] = 0.8
    img[5 * n // 8 : 7 * n // 8, n // 4 : 7 * n // 8] = 0.5
    yy, xx = np.mgrid[0:n, 0:n]
    img[(yy - 0.7 * n) ** 2 + (xx - 0.25 * n) ** 2 < (0.12 * n) ** 2] = 0.95
    return img[..., None]


def smooth_random(n, seed, D=1, bumps=6):
    """Sum of random Gaussian bumps scaled to [0.1, 0.9]."""
    rng = np.random.default_rng(seed)
    x = grid_coordinates(n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    out = np.zeros((n, n, D))
    for d in range(D):
        for _ in range(bumps):
            cx, cy = rng.uniform(0.1, 0.9, 2)
            s = rng.uniform(0.15, 0.4)
            out[..., d] += rng.normal() * np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / (2 * s * s))
        c = out[..., d]
        out[..., d] = 0.1 + 0.8 * (c - c.min()) / (c.max() - c.min())
    return out


def natural_crop():
    from skimage import data

    return data.camera()[64:128, 224:288].astype(np.float64)[..., None] / 255.0
