"""Measurement operators for the inverse problems.

Radon geometry
--------------
The image occupies the unit square ``[-1/2, 1/2]^2`` centred on the
rotation axis, with pixel ``[row, col]`` centred at
``((col + 0.5)/N - 0.5, (row + 0.5)/N - 0.5)`` as ``(x, y)``. For angle
``theta`` the detector axis is ``n = (cos theta, sin theta)`` and rays run
along ``d = (-sin theta, cos theta)``. Detectors are spread evenly over
the image diagonal. Each ray is marched at (at most) half-pixel steps, the
image is bilinearly interpolated with zero outside, and samples are
weighted by the step length. The resulting linear map is stored as
coalesced ``(ray, pixel, weight)`` triplets; :meth:`RadonOperator.forward`
gathers through them and :meth:`RadonOperator.adjoint` scatters.
"""

from __future__ import annotations

import csv
import json
import math
import struct
import warnings
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError, ShapeError

__all__ = [
    "downsample",
    "upsample_nearest",
    "bilinear_upsample",
    "sensor_noise",
    "Sinogram",
    "RadonOperator",
    "default_angles",
    "radon",
    "radon_adjoint",
    "shepp_logan",
]


def _as_hwd(image) -> tuple[np.ndarray, bool]:
    a = np.asarray(image, dtype=np.float64)
    if a.ndim == 2:
        return a[..., None], True
    if a.ndim != 3:
        raise ShapeError(f"expected an (H, W) or (H, W, D) image, got shape {a.shape}")
    return a, False


def downsample(image, factor: int) -> np.ndarray:
    """Box-average ``factor x factor`` blocks per channel.

    Extents not divisible by ``factor`` are cropped (bottom/right) with a
    ``UserWarning``.
    """
    if int(factor) != factor or factor < 1:
        raise DomainError(f"factor must be a positive integer, got {factor!r}")
    a, squeeze = _as_hwd(image)
    H, W, D = a.shape
    h, w = (H // factor) * factor, (W // factor) * factor
    if h == 0 or w == 0:
        raise ShapeError(f"image {H}x{W} is smaller than factor {factor}")
    if (h, w) != (H, W):
        warnings.warn(f"downsample: cropping {H}x{W} to {h}x{w} to fit factor {factor}", stacklevel=2)
        a = a[:h, :w]
    out = a.reshape(h // factor, factor, w // factor, factor, D).mean(axis=(1, 3))
    return out[..., 0] if squeeze else out


def upsample_nearest(image, factor: int) -> np.ndarray:
    a, squeeze = _as_hwd(image)
    out = np.repeat(np.repeat(a, factor, axis=0), factor, axis=1)
    return out[..., 0] if squeeze else out


def _lerp_indices(n_out: int, n_in: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Midpoint convention on both grids; clamp to the outermost input centres.
    u = (np.arange(n_out) + 0.5) * n_in / n_out - 0.5
    u = np.clip(u, 0.0, n_in - 1)
    i0 = np.minimum(np.floor(u).astype(int), n_in - 1)
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, u - i0


def _lerp_axis(a: np.ndarray, n_out: int, axis: int) -> np.ndarray:
    i0, i1, f = _lerp_indices(n_out, a.shape[axis])
    lo = np.take(a, i0, axis=axis)
    hi = np.take(a, i1, axis=axis)
    shape = [1] * a.ndim
    shape[axis] = n_out
    # lo + f (hi - lo) reproduces flat regions exactly.
    return lo + f.reshape(shape) * (hi - lo)


def bilinear_upsample(image, shape: Sequence[int]) -> np.ndarray:
    """Bilinear interpolation of ``image`` onto an ``(H, W)`` grid of cell midpoints."""
    a, squeeze = _as_hwd(image)
    out = _lerp_axis(_lerp_axis(a, shape[0], 0), shape[1], 1)
    return out[..., 0] if squeeze else out


def sensor_noise(image, photon_mean: float = 50.0, readout_sigma: float = 1.0, seed: int = 0) -> np.ndarray:
    """Photon + readout noise: ``(Poisson(tau * x) + N(0, sigma^2)) / tau``.

    Inputs outside [0, 1] are clamped first, with a ``UserWarning``.
    """
    if photon_mean <= 0:
        raise DomainError(f"photon_mean must be positive, got {photon_mean!r}")
    if readout_sigma < 0:
        raise DomainError(f"readout_sigma must be non-negative, got {readout_sigma!r}")
    x = np.asarray(image, dtype=np.float64)
    if x.size and (x.min() < 0.0 or x.max() > 1.0):
        warnings.warn("sensor_noise: clamping input to [0, 1]", stacklevel=2)
        x = np.clip(x, 0.0, 1.0)
    rng = np.random.default_rng(seed)
    counts = rng.poisson(photon_mean * x).astype(np.float64)
    if readout_sigma > 0:
        counts += rng.normal(0.0, readout_sigma, size=x.shape)
    return counts / photon_mean


def default_angles(n: int) -> np.ndarray:
    """``n`` angles spread uniformly over ``[0, pi)``."""
    return np.pi * np.arange(n) / n


@dataclass
class Sinogram:
    """Line integrals indexed ``[angle, detector]``."""

    data: np.ndarray
    angles: np.ndarray
    detector_spacing: float

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        self.angles = np.asarray(self.angles, dtype=np.float64).ravel()
        if self.angles.size < 1:
            raise ShapeError("a sinogram needs at least one angle")
        if np.any(np.diff(self.angles) <= 0):
            raise ShapeError("angles must be strictly increasing")
        if self.data.ndim != 2 or self.data.shape[0] != self.angles.size:
            raise ShapeError(f"data shape {self.data.shape} does not match {self.angles.size} angles")
        self.detector_spacing = float(self.detector_spacing)

    @property
    def n_detectors(self) -> int:
        return self.data.shape[1]

    def header(self) -> dict:
        return {
            "angles": self.angles.tolist(),
            "n_detectors": self.n_detectors,
            "detector_spacing": self.detector_spacing,
            "dtype": "<f8",
        }

    def save_csv(self, path) -> None:
        """One row per angle: ``angle, d_0, ..., d_{n-1}``; spacing in the header row."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["angle"] + [f"det{j}" for j in range(self.n_detectors)] + [f"spacing={self.detector_spacing!r}"])
            for a, row in zip(self.angles, self.data):
                w.writerow([repr(float(a))] + [repr(float(v)) for v in row])

    @classmethod
    def load_csv(cls, path) -> "Sinogram":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        spacing = float(rows[0][-1].split("=", 1)[1])
        angles = [float(r[0]) for r in rows[1:]]
        data = [[float(v) for v in r[1:]] for r in rows[1:]]
        return cls(np.array(data), np.array(angles), spacing)

    def save_binary(self, path) -> None:
        """Little-endian uint64 header length, JSON header, row-major float64 data."""
        head = json.dumps(self.header(), sort_keys=True).encode()
        with open(path, "wb") as fh:
            fh.write(struct.pack("<Q", len(head)))
            fh.write(head)
            fh.write(np.ascontiguousarray(self.data, dtype="<f8").tobytes())

    @classmethod
    def load_binary(cls, path) -> "Sinogram":
        raw = Path(path).read_bytes()
        (n,) = struct.unpack("<Q", raw[:8])
        meta = json.loads(raw[8 : 8 + n])
        data = np.frombuffer(raw[8 + n :], dtype="<f8").reshape(len(meta["angles"]), meta["n_detectors"])
        return cls(data.astype(np.float64), np.array(meta["angles"]), meta["detector_spacing"])


@lru_cache(maxsize=16)
def _radon_triplets(n: int, angles: tuple[float, ...], n_detectors: int):
    diag = math.sqrt(2.0)
    spacing = diag / n_detectors
    t = (np.arange(n_detectors) - (n_detectors - 1) / 2.0) * spacing
    n_steps = math.ceil(diag / (0.5 / n))
    step = diag / n_steps
    s = -diag / 2.0 + (np.arange(n_steps) + 0.5) * step

    ang = np.asarray(angles)
    cos, sin = np.cos(ang)[:, None, None], np.sin(ang)[:, None, None]
    tt, ss = t[None, :, None], s[None, None, :]
    px = tt * cos - ss * sin
    py = tt * sin + ss * cos
    # Continuous pixel-index coordinates: centre of pixel i sits at i.
    u = ((px + 0.5) * n - 0.5).ravel()
    v = ((py + 0.5) * n - 0.5).ravel()
    ray = np.repeat(np.arange(len(angles) * n_detectors), n_steps)

    c0 = np.floor(u).astype(np.int64)
    r0 = np.floor(v).astype(np.int64)
    fu, fv = u - c0, v - r0
    rays, pix, wts = [], [], []
    for dr, dc, wt in ((0, 0, (1 - fv) * (1 - fu)), (0, 1, (1 - fv) * fu), (1, 0, fv * (1 - fu)), (1, 1, fv * fu)):
        rr, cc = r0 + dr, c0 + dc
        ok = (rr >= 0) & (rr < n) & (cc >= 0) & (cc < n) & (wt > 0)
        rays.append(ray[ok])
        pix.append(rr[ok] * n + cc[ok])
        wts.append(wt[ok] * step)
    rays = np.concatenate(rays)
    pix = np.concatenate(pix)
    wts = np.concatenate(wts)

    key = rays * (n * n) + pix
    uniq, inv = np.unique(key, return_inverse=True)
    w = np.bincount(inv, weights=wts)
    return uniq // (n * n), uniq % (n * n), w, spacing


class RadonOperator:
    """Discrete parallel-beam Radon transform of an ``n x n`` image and its exact adjoint."""

    def __init__(self, n: int, angles: Sequence[float], n_detectors: int | None = None):
        if n_detectors is None:
            n_detectors = n
        if n_detectors < 1:
            raise DomainError(f"n_detectors must be >= 1, got {n_detectors}")
        if n < 1:
            raise DomainError(f"image side must be >= 1, got {n}")
        self.n = int(n)
        self.angles = np.asarray(angles, dtype=np.float64).ravel()
        self.n_detectors = int(n_detectors)
        self.ray, self.pix, self.weight, self.detector_spacing = _radon_triplets(
            self.n, tuple(float(a) for a in self.angles), self.n_detectors
        )
        self.sino_shape = (self.angles.size, self.n_detectors)

    def forward(self, image) -> np.ndarray:
        img = np.asarray(image, dtype=np.float64)
        if img.shape != (self.n, self.n):
            raise ShapeError(f"expected a {self.n}x{self.n} image, got {img.shape}")
        vals = self.weight * img.ravel()[self.pix]
        return np.bincount(self.ray, weights=vals, minlength=self.sino_shape[0] * self.sino_shape[1]).reshape(self.sino_shape)

    def adjoint(self, sino) -> np.ndarray:
        y = np.asarray(sino, dtype=np.float64)
        if y.shape != self.sino_shape:
            raise ShapeError(f"expected a sinogram of shape {self.sino_shape}, got {y.shape}")
        vals = self.weight * y.ravel()[self.ray]
        return np.bincount(self.pix, weights=vals, minlength=self.n * self.n).reshape(self.n, self.n)


def radon(image, angles: Sequence[float], n_detectors: int | None = None) -> Sinogram:
    img = np.asarray(image, dtype=np.float64)
    if img.ndim == 3 and img.shape[-1] == 1:
        img = img[..., 0]
    if img.ndim != 2 or img.shape[0] != img.shape[1]:
        raise ShapeError(f"radon expects a square single-channel image, got {np.shape(image)}")
    if n_detectors is not None and n_detectors < 1:
        raise DomainError(f"n_detectors must be >= 1, got {n_detectors}")
    op = RadonOperator(img.shape[0], angles, n_detectors)
    return Sinogram(op.forward(img), op.angles, op.detector_spacing)


def radon_adjoint(sino: Sinogram, image_shape: Sequence[int]) -> np.ndarray:
    if len(image_shape) != 2 or image_shape[0] != image_shape[1]:
        raise ShapeError(f"image_shape must be square 2-D, got {tuple(image_shape)}")
    op = RadonOperator(image_shape[0], sino.angles, sino.n_detectors)
    if not math.isclose(op.detector_spacing, sino.detector_spacing, rel_tol=1e-12):
        raise ShapeError("sinogram detector spacing does not match this image size")
    return op.adjoint(sino.data)


# (intensity, semi-axis a, semi-axis b, x0, y0, rotation in degrees)
_SHEPP_LOGAN = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
)


def shepp_logan(n: int, supersample: int = 4) -> np.ndarray:
    """Modified Shepp-Logan phantom on an ``n x n`` grid, values in [0, 1].

    Each pixel is the mean over ``supersample^2`` sub-samples.
    """
    m = n * supersample
    c = (np.arange(m) + 0.5) / m * 2.0 - 1.0
    x, y = np.meshgrid(c, -c)
    img = np.zeros((m, m))
    for val, a, b, x0, y0, deg in _SHEPP_LOGAN:
        th = math.radians(deg)
        xr = (x - x0) * math.cos(th) + (y - y0) * math.sin(th)
        yr = -(x - x0) * math.sin(th) + (y - y0) * math.cos(th)
        img[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += val
    img = img.reshape(n, supersample, n, supersample).mean(axis=(1, 3))
    return np.clip(img, 0.0, 1.0)
