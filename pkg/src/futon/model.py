"""The FUTON model: a CP-factorized generalized Fourier series.

For an input ``x`` in ``[0, 1]^C`` the model computes::

    h_c = U_c^T phi(x_c)          (K*R per axis)
    g   = h_1 * h_2 * ... * h_C   (Hadamard, R per axis)
    s   = act(V g)                (D*R)

The dense coefficient tensor is never formed. Gradients are analytic.
"""

from __future__ import annotations

import enum
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .basis import BasisKind, BasisSpec, eval_basis
from .errors import ConfigError, DomainError, ShapeError
from .tensor import CpFactors

__all__ = [
    "Activation",
    "FutonModel",
    "Gradients",
    "AxisGrid",
    "init_model",
    "forward",
    "backward",
    "forward_features",
    "backward_features",
    "forward_grid",
    "backward_grid",
    "forward_points",
    "backward_points",
    "save_checkpoint",
    "load_checkpoint",
]


class Activation(str, enum.Enum):
    NONE = "none"
    TANH = "tanh"


@dataclass
class FutonModel:
    basis: BasisSpec
    factors: CpFactors
    activation: Activation = Activation.TANH

    def __post_init__(self):
        self.activation = Activation(self.activation)
        if self.basis.K != self.factors.K:
            raise ShapeError(
                f"basis has K={self.basis.K} but factors have K={self.factors.K}"
            )

    @property
    def C(self) -> int:
        return self.factors.C

    input_dim = C

    @property
    def K(self) -> int:
        return self.factors.K

    @property
    def R(self) -> int:
        return self.factors.R

    @property
    def D(self) -> int:
        return self.factors.D

    output_dim = D

    @property
    def n_params(self) -> int:
        return self.factors.n_params

    def parameters(self) -> list[np.ndarray]:
        """Live references ``[U_1, ..., U_C, V]``; updating them updates the model."""
        return [*self.factors.input_factors, self.factors.output_factor]

    def copy(self) -> "FutonModel":
        return FutonModel(self.basis, self.factors.copy(), self.activation)

    def __call__(self, x):
        return forward(self, x)


@dataclass
class Gradients:
    d_input_factors: list[np.ndarray]
    d_output_factor: np.ndarray

    def as_list(self) -> list[np.ndarray]:
        return [*self.d_input_factors, self.d_output_factor]

    def __add__(self, other: "Gradients") -> "Gradients":
        return Gradients(
            [a + b for a, b in zip(self.d_input_factors, other.d_input_factors)],
            self.d_output_factor + other.d_output_factor,
        )


def init_model(
    C: int,
    K: int,
    R: int,
    D: int,
    basis_kind: BasisKind | str = BasisKind.COSINE,
    activation: Activation | str = Activation.TANH,
    seed: int = 0,
) -> FutonModel:
    """Draw factors uniformly: ``U ~ U(-sqrt(3/K), sqrt(3/K))``, ``V ~ U(-sqrt(3/R), sqrt(3/R))``.

    These bounds give each ``h`` entry and the pre-activation output unit
    variance regardless of ``C``.
    """
    for name, val in (("C", C), ("K", K), ("R", R), ("D", D)):
        if isinstance(val, bool) or int(val) != val or val < 1:
            raise DomainError(f"{name} must be a positive integer, got {val!r}")
    rng = np.random.default_rng(seed)
    a_u = math.sqrt(3.0 / K)
    a_v = math.sqrt(3.0 / R)
    us = [rng.uniform(-a_u, a_u, size=(K, R)) for _ in range(C)]
    v = rng.uniform(-a_v, a_v, size=(D, R))
    return FutonModel(BasisSpec(basis_kind, K), CpFactors(us, v), Activation(activation))


def _activate(model: FutonModel, pre: np.ndarray) -> np.ndarray:
    if model.activation is Activation.TANH:
        return np.tanh(pre)
    return pre


def _activation_grad(model: FutonModel, pre: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    if model.activation is Activation.TANH:
        t = np.tanh(pre)
        return upstream * (1.0 - t * t)
    return upstream


def _as_points(model: FutonModel, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    if pts.ndim != 2 or pts.shape[1] != model.C:
        raise ShapeError(f"expected coordinates of shape (C,) or (B, C) with C={model.C}, got {x.shape}")
    return pts, single


def _leave_one_out_products(hs: Sequence[np.ndarray]) -> list[np.ndarray]:
    """``prod_{c' != c} hs[c']`` for each ``c``, without division."""
    C = len(hs)
    prefix = [np.ones_like(hs[0])]
    for h in hs[:-1]:
        prefix.append(prefix[-1] * h)
    out = [None] * C
    suffix = np.ones_like(hs[0])
    for c in range(C - 1, -1, -1):
        out[c] = prefix[c] * suffix
        suffix = suffix * hs[c]
    return out


def forward_features(model: FutonModel, phis: Sequence[np.ndarray]) -> tuple[np.ndarray, dict]:
    """Forward pass from per-axis basis rows ``phis[c]`` of shape ``(B, K)``.

    Returns ``(output (B, D), cache)``; the cache feeds :func:`backward_features`.
    """
    hs = [phi @ u for phi, u in zip(phis, model.factors.input_factors)]
    g = hs[0]
    for h in hs[1:]:
        g = g * h
    pre = g @ model.factors.output_factor.T
    return _activate(model, pre), {"hs": hs, "g": g, "pre": pre}


def backward_features(
    model: FutonModel,
    phis: Sequence[np.ndarray],
    upstream: np.ndarray,
    cache: dict | None = None,
) -> Gradients:
    """Parameter gradients summed over the batch rows."""
    if cache is None:
        _, cache = forward_features(model, phis)
    upstream = np.asarray(upstream, dtype=np.float64).reshape(cache["pre"].shape)
    da = _activation_grad(model, cache["pre"], upstream)
    dv = da.T @ cache["g"]
    dg = da @ model.factors.output_factor
    others = _leave_one_out_products(cache["hs"])
    dus = [phi.T @ (dg * o) for phi, o in zip(phis, others)]
    return Gradients(dus, dv)


def _phis_for_points(model: FutonModel, pts: np.ndarray) -> list[np.ndarray]:
    return [eval_basis(model.basis, pts[:, c]) for c in range(model.C)]


def forward(model: FutonModel, x, *, pre_activation: bool = False) -> np.ndarray:
    """Evaluate the model at one point ``(C,)`` or a batch ``(B, C)``."""
    pts, single = _as_points(model, x)
    out, cache = forward_features(model, _phis_for_points(model, pts))
    if pre_activation:
        out = cache["pre"]
    return out[0] if single else out


def backward(model: FutonModel, x, upstream) -> Gradients:
    """Gradients of ``sum(upstream * forward(x))`` w.r.t. every factor."""
    pts, _ = _as_points(model, x)
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape not in ((model.D,), (pts.shape[0], model.D)):
        raise ShapeError(f"upstream shape {upstream.shape} does not match outputs ({pts.shape[0]}, {model.D})")
    return backward_features(model, _phis_for_points(model, pts), upstream.reshape(pts.shape[0], model.D))


class AxisGrid:
    """A tensor-product grid with the basis pre-evaluated along each axis."""

    def __init__(self, basis: BasisSpec, axis_coords: Sequence):
        self.basis = basis
        self.coords = [np.asarray(a, dtype=np.float64).ravel() for a in axis_coords]
        self.phis = [eval_basis(basis, a) for a in self.coords]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.coords)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))


def _axis_grid(model: FutonModel, axis_grids) -> AxisGrid:
    if isinstance(axis_grids, AxisGrid):
        if axis_grids.basis != model.basis:
            raise ConfigError("grid was built for a different basis")
        grid = axis_grids
    else:
        grid = AxisGrid(model.basis, axis_grids)
    if len(grid.coords) != model.C:
        raise ShapeError(f"expected {model.C} axis grids, got {len(grid.coords)}")
    return grid


def _row_khatri_rao(hs: Sequence[np.ndarray], R: int) -> np.ndarray:
    """Row-wise Khatri-Rao product: ``out[(n1, n2, ...), r] = prod_c hs[c][n_c, r]``."""
    out = np.ones((1, R))
    for h in hs:
        out = (out[:, None, :] * h[None, :, :]).reshape(-1, R)
    return out


def forward_grid(model: FutonModel, axis_grids, *, pre_activation: bool = False) -> np.ndarray:
    """Evaluate on the tensor-product grid; result has shape ``(N_1, ..., N_C, D)``.

    ``H_c = Phi_c U_c`` is formed once per axis, so the basis cost is
    ``sum_c N_c K R`` rather than ``prod_c N_c * C K R``.
    """
    grid = _axis_grid(model, axis_grids)
    V = model.factors.output_factor
    hs = [phi @ u for phi, u in zip(grid.phis, model.factors.input_factors)]
    rest = _row_khatri_rao(hs[1:], model.R)  # (M, R)
    lead = hs[0][:, None, :] * V[None, :, :]  # (N_1, D, R)
    pre = np.matmul(lead, rest.T)  # (N_1, D, M)
    pre = np.moveaxis(pre, 1, 2).reshape(grid.shape + (model.D,))
    return pre if pre_activation else _activate(model, pre)


def backward_grid(model: FutonModel, axis_grids, upstream, *, pre: np.ndarray | None = None) -> Gradients:
    """Gradients of ``sum(upstream * forward_grid(...))`` for a full-grid upstream.

    ``pre`` may pass in the pre-activation grid from an earlier
    ``forward_grid(..., pre_activation=True)`` call to skip recomputing it.
    """
    grid = _axis_grid(model, axis_grids)
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != grid.shape + (model.D,):
        raise ShapeError(f"upstream shape {upstream.shape} != grid shape {grid.shape + (model.D,)}")
    C, R = model.C, model.R
    V = model.factors.output_factor
    if model.activation is not Activation.NONE:
        if pre is None:
            pre = forward_grid(model, grid, pre_activation=True)
        upstream = _activation_grad(model, pre, upstream)
    hs = [phi @ u for phi, u in zip(grid.phis, model.factors.input_factors)]

    dus = []
    dv = None
    for c in range(C):
        # (N_c, M_c, D): axis c leading, the other grid axes flattened in order.
        Gc = np.moveaxis(upstream, c, 0).reshape(grid.shape[c], -1, model.D)
        rest = _row_khatri_rao([h for j, h in enumerate(hs) if j != c], R)  # (M_c, R)
        T = np.matmul(np.swapaxes(Gc, 1, 2), rest)  # (N_c, D, R)
        dh = np.einsum("ndr,dr->nr", T, V)
        dus.append(grid.phis[c].T @ dh)
        if dv is None:
            dv = np.einsum("ndr,nr->dr", T, hs[c])
    return Gradients(dus, dv)


def forward_points(model: FutonModel, grid: AxisGrid, flat_idx: np.ndarray) -> tuple[np.ndarray, dict]:
    """Forward pass at selected grid nodes (flat row-major indices).

    Uses the per-axis tables ``H_c = Phi_c U_c`` and gathers rows, which is
    the cheap path for minibatch training on gridded data.
    """
    multi = np.unravel_index(np.asarray(flat_idx), grid.shape)
    tables = [phi @ u for phi, u in zip(grid.phis, model.factors.input_factors)]
    hs = [t[i] for t, i in zip(tables, multi)]
    g = hs[0]
    for h in hs[1:]:
        g = g * h
    pre = g @ model.factors.output_factor.T
    return _activate(model, pre), {"multi": multi, "hs": hs, "g": g, "pre": pre}


def backward_points(
    model: FutonModel,
    grid: AxisGrid,
    flat_idx: np.ndarray,
    upstream: np.ndarray,
    cache: dict | None = None,
) -> Gradients:
    if cache is None:
        _, cache = forward_points(model, grid, flat_idx)
    da = _activation_grad(model, cache["pre"], np.asarray(upstream, dtype=np.float64))
    dv = da.T @ cache["g"]
    dg = da @ model.factors.output_factor
    others = _leave_one_out_products(cache["hs"])
    dus = []
    for c, (idx, o) in enumerate(zip(cache["multi"], others)):
        dtable = np.zeros((grid.shape[c], model.R))
        np.add.at(dtable, idx, dg * o)
        dus.append(grid.phis[c].T @ dtable)
    return Gradients(dus, dv)


# --- checkpoints -----------------------------------------------------------

_MAGIC = b"FUTONCK1"


def _header(model: FutonModel) -> dict:
    return {
        "format": "futon-checkpoint",
        "version": 1,
        "C": model.C,
        "K": model.K,
        "R": model.R,
        "D": model.D,
        "basis": model.basis.kind.value,
        "activation": model.activation.value,
    }


def _from_header(meta: dict, us: list[np.ndarray], v: np.ndarray) -> FutonModel:
    return FutonModel(BasisSpec(meta["basis"], meta["K"]), CpFactors(us, v), Activation(meta["activation"]))


def save_checkpoint(model: FutonModel, path) -> Path:
    """Write ``model`` to ``path``; ``.json`` selects the text format, anything else binary.

    Binary layout: 8-byte magic, little-endian uint64 header length, UTF-8
    JSON header, then ``U_1 ... U_C, V`` as row-major little-endian float64.
    """
    path = Path(path)
    meta = _header(model)
    if path.suffix.lower() == ".json":
        meta["input_factors"] = [u.ravel().tolist() for u in model.factors.input_factors]
        meta["output_factor"] = model.factors.output_factor.ravel().tolist()
        path.write_text(json.dumps(meta))
        return path
    meta["dtype"] = "<f8"
    head = json.dumps(meta, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", len(head)))
        fh.write(head)
        for p in model.parameters():
            fh.write(np.ascontiguousarray(p, dtype="<f8").tobytes())
    return path


def load_checkpoint(path) -> FutonModel:
    path = Path(path)
    raw = path.read_bytes()
    if raw.startswith(_MAGIC):
        (n,) = struct.unpack("<Q", raw[8:16])
        meta = json.loads(raw[16 : 16 + n])
        body = np.frombuffer(raw[16 + n :], dtype="<f8").astype(np.float64)
        C, K, R, D = meta["C"], meta["K"], meta["R"], meta["D"]
        if body.size != C * K * R + D * R:
            raise ShapeError(f"checkpoint body has {body.size} values, expected {C * K * R + D * R}")
        us = [body[c * K * R : (c + 1) * K * R].reshape(K, R) for c in range(C)]
        v = body[C * K * R :].reshape(D, R)
        return _from_header(meta, us, v)
    meta = json.loads(raw.decode())
    K, R, D = meta["K"], meta["R"], meta["D"]
    us = [np.array(u, dtype=np.float64).reshape(K, R) for u in meta["input_factors"]]
    v = np.array(meta["output_factor"], dtype=np.float64).reshape(D, R)
    return _from_header(meta, us, v)
