"""Brute-force generalized Fourier series on regular grids.

This is the reference side of every equivalence check: coefficients come
from midpoint-rule projection onto the separable basis, and evaluation
materializes the full basis tensor at each point. Costs are exponential in
the input dimension, so sizes are capped at ``MAX_ORACLE_ENTRIES``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .basis import BasisKind, BasisSpec, chebyshev_weight, eval_basis
from .errors import ResolutionError, ShapeError
from .tensor import FullCoeffTensor, generalized_dot, outer_product

__all__ = [
    "MAX_ORACLE_ENTRIES",
    "grid_coordinates",
    "grid_points",
    "basis_tensor",
    "project_gfs",
    "eval_gfs",
    "eval_gfs_grid",
    "l2_error",
    "convergence_curve",
]

MAX_ORACLE_ENTRIES = 2**24


def grid_coordinates(n: int) -> np.ndarray:
    """Cell midpoints ``(i + 0.5) / n`` for ``i = 0 .. n-1``."""
    return (np.arange(n) + 0.5) / n


def grid_points(shape: Sequence[int]) -> np.ndarray:
    """All midpoint nodes of a grid, row-major, as an array of shape ``(prod(shape), C)``."""
    axes = [grid_coordinates(n) for n in shape]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _check_oracle_size(K: int, C: int, D: int) -> None:
    if K**C * D > MAX_ORACLE_ENTRIES:
        raise ResolutionError(
            f"dense tensor K^C*D = {K**C * D} exceeds the oracle cap {MAX_ORACLE_ENTRIES}"
        )


def basis_tensor(basis: BasisSpec, x) -> np.ndarray:
    """``Phi(x) = phi(x_1) (x) ... (x) phi(x_C)`` with shape ``(K,) * C``."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    return outer_product([eval_basis(basis, xc) for xc in x])


def _design_rows(basis: BasisSpec, pts: np.ndarray) -> np.ndarray:
    # Row p is Phi(pts[p]) flattened row-major.
    P, C = pts.shape
    rows = np.ones((P, 1))
    for c in range(C):
        phi = eval_basis(basis, pts[:, c])
        rows = (rows[:, :, None] * phi[:, None, :]).reshape(P, -1)
    return rows


def _as_grid_signal(signal) -> np.ndarray:
    s = np.asarray(signal, dtype=np.float64)
    if s.ndim < 2:
        raise ShapeError(f"signal must have shape (N_1, ..., N_C, D), got {s.shape}")
    return s


def project_gfs(signal, basis: BasisSpec, K: int | None = None) -> FullCoeffTensor:
    """Coefficients ``w[k, d] = int s_d(x) phi_k(x) dx`` by midpoint quadrature.

    ``signal`` has shape ``(N_1, ..., N_C, D)`` with node ``i`` of an axis of
    length ``N`` at ``(i + 0.5) / N``. For the Chebyshev family the weight
    function is included in the integrand.
    """
    s = _as_grid_signal(signal)
    if K is not None and K != basis.K:
        basis = BasisSpec(basis.kind, K)
    K = basis.K
    grid_shape, D = s.shape[:-1], s.shape[-1]
    C = len(grid_shape)
    if K > min(grid_shape) // 2:
        raise ResolutionError(f"K={K} exceeds half the smallest grid extent {min(grid_shape)}")
    _check_oracle_size(K, C, D)

    pts = grid_points(grid_shape)
    rows = _design_rows(basis, pts)
    vals = s.reshape(-1, D)
    cell = 1.0 / pts.shape[0]
    if basis.kind is BasisKind.CHEBYSHEV:
        vals = vals * np.prod(chebyshev_weight(pts), axis=1)[:, None]
    w = cell * (rows.T @ vals)
    return FullCoeffTensor((K,) * C + (D,), w)


def eval_gfs(w: FullCoeffTensor, basis: BasisSpec, x) -> np.ndarray:
    """``Phi(x) . W`` at one point ``(C,)`` or a batch ``(P, C)``."""
    if basis.K != w.K:
        raise ShapeError(f"basis K={basis.K} does not match tensor K={w.K}")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        if x.size != w.C:
            raise ShapeError(f"point has {x.size} coordinates, tensor expects {w.C}")
        return generalized_dot(basis_tensor(basis, x), w.array)
    if x.ndim != 2 or x.shape[1] != w.C:
        raise ShapeError(f"points must have shape (P, {w.C}), got {x.shape}")
    rows = _design_rows(basis, x)
    return rows @ w.data.reshape(-1, w.D)


def eval_gfs_grid(w: FullCoeffTensor, basis: BasisSpec, grid_shape: Sequence[int]) -> np.ndarray:
    grid_shape = tuple(grid_shape)
    return eval_gfs(w, basis, grid_points(grid_shape)).reshape(grid_shape + (w.D,))


def l2_error(a, b) -> float:
    """Midpoint-rule ``|| a - b ||_{L2}`` over a unit-domain grid, summed over channels."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    n_nodes = int(np.prod(a.shape[:-1]))
    return float(np.sqrt(np.sum((a - b) ** 2) / n_nodes))


def convergence_curve(signal, basis_kind: BasisKind | str, K_list: Sequence[int]) -> list[tuple[int, float]]:
    """L2 truncation error of the projected series for each ``K`` in ``K_list``."""
    s = _as_grid_signal(signal)
    out = []
    for K in K_list:
        basis = BasisSpec(basis_kind, K)
        w = project_gfs(s, basis)
        approx = eval_gfs_grid(w, basis, s.shape[:-1])
        out.append((int(K), l2_error(s, approx)))
    return out
