"""Reading and writing images and voxel grids.

Images load as float arrays in [0, 1] of shape ``(H, W, D)``. Volumes are
raw unsigned bytes (0 = empty, 255 = occupied) with a JSON sidecar
``{"nx": ..., "ny": ..., "nz": ...}``; bytes are ordered with ``z``
fastest, i.e. a C-order array indexed ``[x, y, z]``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ShapeError

__all__ = ["load_image", "save_image", "load_volume", "save_volume", "sidecar_path"]


def load_image(path) -> np.ndarray:
    img = Image.open(path)
    img.load()
    if img.mode in ("I;16", "I;16B", "I;16L", "I"):
        a = np.asarray(img, dtype=np.float64)
        peak = 65535.0 if img.mode.startswith("I;16") or a.max() > 255 else 255.0
        a = a / peak
    else:
        if img.mode in ("RGBA", "P", "CMYK", "YCbCr"):
            img = img.convert("RGB")
        elif img.mode == "LA":
            img = img.convert("L")
        elif img.mode not in ("L", "RGB"):
            raise ShapeError(f"unsupported image mode {img.mode!r}")
        a = np.asarray(img, dtype=np.float64) / 255.0
    if a.ndim == 2:
        a = a[..., None]
    return np.clip(a, 0.0, 1.0)


def save_image(path, image) -> None:
    """Write a [0, 1] image as an 8-bit PNG (values are clipped)."""
    a = np.asarray(image, dtype=np.float64)
    if a.ndim == 3 and a.shape[-1] == 1:
        a = a[..., 0]
    u8 = np.round(np.clip(a, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(u8).save(path, format="PNG")


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_suffix(path.suffix + ".json") if path.suffix != ".json" else path


def load_volume(path) -> np.ndarray:
    """Occupancy in {0, 1} with shape ``(nx, ny, nz)``."""
    path = Path(path)
    side = sidecar_path(path)
    if not side.exists():
        side = path.with_suffix(".json")
    meta = json.loads(side.read_text())
    shape = (int(meta["nx"]), int(meta["ny"]), int(meta["nz"]))
    raw = np.frombuffer(path.read_bytes(), dtype=np.uint8)
    if raw.size != int(np.prod(shape)):
        raise ShapeError(f"{path} holds {raw.size} bytes, sidecar says {shape}")
    return (raw.reshape(shape) > 127).astype(np.float64)


def save_volume(path, occupancy) -> None:
    occ = np.asarray(occupancy)
    if occ.ndim != 3:
        raise ShapeError(f"volume must be 3-D, got shape {occ.shape}")
    path = Path(path)
    path.write_bytes(np.where(occ > 0.5, 255, 0).astype(np.uint8).tobytes())
    nx, ny, nz = occ.shape
    sidecar_path(path).write_text(json.dumps({"nx": nx, "ny": ny, "nz": nz}))
