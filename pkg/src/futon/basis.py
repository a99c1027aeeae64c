"""One-dimensional orthonormal bases on [0, 1].

Three families are provided:

* ``cosine``: ``phi_0 = 1``, ``phi_k = sqrt(2) cos(k pi x)``; orthonormal
  under the plain L2 inner product.
* ``legendre``: shifted Legendre polynomials ``sqrt(2k+1) P_k(2x-1)``;
  orthonormal under the plain L2 inner product.
* ``chebyshev``: first-kind polynomials ``T_k(2x-1)`` scaled by
  ``sqrt(1/pi)`` (k = 0) or ``sqrt(2/pi)`` (k >= 1); orthonormal under the
  weight ``1 / sqrt(x (1 - x))`` only.

Polynomials are evaluated with their three-term recurrences, which stay
bounded for K in the thousands.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from .errors import DomainError, ResolutionError

__all__ = [
    "BasisKind",
    "BasisSpec",
    "eval_basis",
    "gram_matrix",
    "quadrature_rule",
    "chebyshev_weight",
]


class BasisKind(str, enum.Enum):
    COSINE = "cosine"
    LEGENDRE = "legendre"
    CHEBYSHEV = "chebyshev"


@dataclass(frozen=True)
class BasisSpec:
    """A basis family truncated to its first ``K`` members."""

    kind: BasisKind
    K: int

    def __post_init__(self):
        object.__setattr__(self, "kind", BasisKind(self.kind))
        if isinstance(self.K, bool) or int(self.K) != self.K or self.K < 1:
            raise DomainError(f"K must be a positive integer, got {self.K!r}")
        object.__setattr__(self, "K", int(self.K))

    def __call__(self, x):
        return eval_basis(self, x)


def _check_unit_interval(x: np.ndarray) -> None:
    if x.size and not (np.all(x >= 0.0) and np.all(x <= 1.0)):
        bad = x[~((x >= 0.0) & (x <= 1.0))].ravel()[0]
        raise DomainError(f"coordinates must lie in [0, 1]; got {bad!r}")


def eval_basis(spec: BasisSpec, x) -> np.ndarray:
    """Evaluate ``[phi_0(x), ..., phi_{K-1}(x)]``.

    ``x`` may be a scalar or an array of any shape; the result has shape
    ``np.shape(x) + (K,)``.
    """
    x = np.asarray(x, dtype=np.float64)
    _check_unit_interval(x)
    K = spec.K
    out = np.empty(x.shape + (K,), dtype=np.float64)

    if spec.kind is BasisKind.COSINE:
        out[..., 0] = 1.0
        if K > 1:
            k = np.arange(1, K, dtype=np.float64)
            out[..., 1:] = math.sqrt(2.0) * np.cos(np.pi * x[..., None] * k)
        return out

    t = 2.0 * x - 1.0
    if spec.kind is BasisKind.LEGENDRE:
        # (k+1) P_{k+1} = (2k+1) t P_k - k P_{k-1}
        p_prev = np.ones_like(t)
        out[..., 0] = p_prev
        if K > 1:
            p = t.copy()
            out[..., 1] = p
            for k in range(1, K - 1):
                p_prev, p = p, ((2 * k + 1) * t * p - k * p_prev) / (k + 1)
                out[..., k + 1] = p
        out *= np.sqrt(2.0 * np.arange(K) + 1.0)
        return out

    # T_{k+1} = 2 t T_k - T_{k-1}
    out[..., 0] = 1.0
    if K > 1:
        out[..., 1] = t
        for k in range(1, K - 1):
            out[..., k + 1] = 2.0 * t * out[..., k] - out[..., k - 1]
    scale = np.full(K, math.sqrt(2.0 / math.pi))
    scale[0] = math.sqrt(1.0 / math.pi)
    out *= scale
    return out


def chebyshev_weight(x) -> np.ndarray:
    """The weight ``1 / sqrt(x (1 - x))`` under which the Chebyshev family is orthonormal."""
    x = np.asarray(x, dtype=np.float64)
    return 1.0 / np.sqrt(x * (1.0 - x))


@lru_cache(maxsize=32)
def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = roots_legendre(n)
    t.flags.writeable = False
    w.flags.writeable = False
    return t, w


def quadrature_rule(kind: BasisKind | str, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for the inner product native to ``kind``.

    cosine
        Midpoint rule on ``n`` uniform cells; exact for products of two
        members with combined frequency below ``2n``.
    legendre
        ``n``-point Gauss-Legendre mapped to [0, 1]; exact up to degree ``2n - 1``.
    chebyshev
        Midpoint rule in the angle ``theta`` with ``x = (1 - cos theta) / 2``.
        The weight is absorbed by the change of variables, so the weights
        are the constant ``pi / n`` and the rule is Gauss-Chebyshev.
    """
    kind = BasisKind(kind)
    if kind is BasisKind.COSINE:
        return (np.arange(n) + 0.5) / n, np.full(n, 1.0 / n)
    if kind is BasisKind.LEGENDRE:
        t, w = _gauss_legendre(n)
        return (t + 1.0) / 2.0, w / 2.0
    theta = (np.arange(n) + 0.5) * np.pi / n
    return (1.0 - np.cos(theta)) / 2.0, np.full(n, np.pi / n)


def gram_matrix(spec: BasisSpec, quad_points: int) -> np.ndarray:
    """Quadrature estimate of ``<phi_k, phi_l>`` for all ``k, l < K``.

    For Chebyshev the inner product carries the weight ``1 / sqrt(x (1 - x))``.
    """
    if quad_points < 2 * spec.K:
        raise ResolutionError(
            f"quad_points={quad_points} is below 2*K={2 * spec.K}"
        )
    x, w = quadrature_rule(spec.kind, quad_points)
    phi = eval_basis(spec, x)
    return (phi * w[:, None]).T @ phi
