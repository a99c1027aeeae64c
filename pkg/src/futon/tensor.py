"""Small dense tensor algebra used by the model and its oracles.

Everything here works on plain ``numpy`` arrays in row-major order. The
dense coefficient tensor is an oracle vehicle: the model never builds it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import ShapeError

__all__ = [
    "FullCoeffTensor",
    "CpFactors",
    "outer_product",
    "hadamard",
    "generalized_dot",
    "kruskal_materialize",
    "cp_materialize",
    "fiber_cp_construction",
    "min_fiber_mode",
    "fiber_rank_bound",
]


@dataclass
class FullCoeffTensor:
    """Dense coefficient tensor of shape ``(K, ..., K, D)``, stored flat."""

    shape: tuple[int, ...]
    data: np.ndarray

    def __post_init__(self):
        self.shape = tuple(int(s) for s in self.shape)
        self.data = np.ascontiguousarray(self.data, dtype=np.float64).ravel()
        if any(s < 1 for s in self.shape):
            raise ShapeError(f"shape entries must be positive, got {self.shape}")
        if self.data.size != int(np.prod(self.shape)):
            raise ShapeError(
                f"data has {self.data.size} entries but shape {self.shape} "
                f"needs {int(np.prod(self.shape))}"
            )

    @classmethod
    def from_array(cls, a) -> "FullCoeffTensor":
        a = np.asarray(a, dtype=np.float64)
        return cls(a.shape, a)

    @property
    def array(self) -> np.ndarray:
        return self.data.reshape(self.shape)

    @property
    def C(self) -> int:
        return len(self.shape) - 1

    @property
    def K(self) -> int:
        return self.shape[0]

    @property
    def D(self) -> int:
        return self.shape[-1]


@dataclass
class CpFactors:
    """CP factors of a ``(K, ..., K, D)`` tensor.

    ``input_factors[c]`` is ``U^(c)`` with shape ``(K, R)``; ``output_factor``
    is ``V`` with shape ``(D, R)``. Column ``r`` of each matrix is one
    rank-1 term.
    """

    input_factors: list[np.ndarray]
    output_factor: np.ndarray

    def __post_init__(self):
        self.input_factors = [np.asarray(u, dtype=np.float64) for u in self.input_factors]
        self.output_factor = np.asarray(self.output_factor, dtype=np.float64)
        if not self.input_factors:
            raise ShapeError("at least one input factor is required")
        if self.input_factors[0].ndim != 2:
            raise ShapeError("input factors must be 2-D (K, R) matrices")
        K, R = self.input_factors[0].shape
        for c, u in enumerate(self.input_factors):
            if u.ndim != 2 or u.shape != (K, R):
                raise ShapeError(
                    f"input factor {c} has shape {u.shape}, expected ({K}, {R})"
                )
        v = self.output_factor
        if v.ndim != 2 or v.shape[1] != R:
            raise ShapeError(f"output factor has shape {v.shape}, expected (D, {R})")
        if K < 1 or R < 1 or v.shape[0] < 1:
            raise ShapeError("factor dimensions must be positive")

    @property
    def C(self) -> int:
        return len(self.input_factors)

    @property
    def K(self) -> int:
        return self.input_factors[0].shape[0]

    @property
    def R(self) -> int:
        return self.output_factor.shape[1]

    @property
    def rank(self) -> int:
        return self.R

    @property
    def D(self) -> int:
        return self.output_factor.shape[0]

    @property
    def n_params(self) -> int:
        return self.C * self.K * self.R + self.D * self.R

    def copy(self) -> "CpFactors":
        return CpFactors([u.copy() for u in self.input_factors], self.output_factor.copy())

    def as_kruskal(self) -> list[np.ndarray]:
        return [*self.input_factors, self.output_factor]


def outer_product(vectors: Sequence) -> np.ndarray:
    """Tensor product ``v1 (x) v2 (x) ... (x) vM``."""
    if len(vectors) == 0:
        raise ShapeError("outer_product needs at least one vector")
    vs = [np.asarray(v, dtype=np.float64) for v in vectors]
    for v in vs:
        if v.ndim != 1 or v.size == 0:
            raise ShapeError(f"outer_product expects non-empty 1-D vectors, got shape {v.shape}")
    return reduce(np.multiply.outer, vs)


def hadamard(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"hadamard operands differ in shape: {a.shape} vs {b.shape}")
    return a * b


def generalized_dot(a, b) -> np.ndarray:
    """Contract every axis of ``a`` against the leading axes of ``b``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if b.ndim < a.ndim or b.shape[: a.ndim] != a.shape:
        raise ShapeError(
            f"leading dims of b {b.shape} must equal dims of a {a.shape}"
        )
    return np.tensordot(a, b, axes=a.ndim)


def kruskal_materialize(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Sum of rank-1 terms ``sum_r f1[:, r] (x) ... (x) fM[:, r]``.

    Terms are accumulated in index order into one buffer.
    """
    factors = [np.asarray(f, dtype=np.float64) for f in factors]
    R = factors[0].shape[1]
    if any(f.ndim != 2 or f.shape[1] != R for f in factors):
        raise ShapeError("all factor matrices must be 2-D with a common column count")
    out = np.zeros(tuple(f.shape[0] for f in factors))
    for r in range(R):
        out += outer_product([f[:, r] for f in factors])
    return out


def cp_materialize(factors: CpFactors) -> FullCoeffTensor:
    """Dense ``W = sum_r u_r^(1) (x) ... (x) u_r^(C) (x) v_r``."""
    return FullCoeffTensor.from_array(kruskal_materialize(factors.as_kruskal()))


def fiber_cp_construction(w, mode: int) -> list[np.ndarray]:
    """Exact CP decomposition built from the mode-``mode`` fibers of ``w``.

    Returns one factor matrix per mode. There is one rank-1 term per
    multi-index over the remaining modes (lexicographic order): its
    ``mode`` vector is the fiber at that multi-index and every other mode
    vector is a standard basis vector selecting that index. The term count
    is therefore ``prod(shape[j] for j != mode)``.
    """
    a = w.array if isinstance(w, FullCoeffTensor) else np.asarray(w, dtype=np.float64)
    M = a.ndim
    if not isinstance(mode, (int, np.integer)) or not -M <= mode < M:
        raise IndexError(f"mode {mode!r} out of range for an order-{M} tensor")
    mode = int(mode) % M
    rest = [s for j, s in enumerate(a.shape) if j != mode]
    n_terms = int(np.prod(rest)) if rest else 1

    factors: list[np.ndarray] = []
    multi = np.unravel_index(np.arange(n_terms), rest) if rest else ()
    slot = 0
    for j, size in enumerate(a.shape):
        if j == mode:
            factors.append(np.moveaxis(a, mode, 0).reshape(size, n_terms).copy())
        else:
            f = np.zeros((size, n_terms))
            f[multi[slot], np.arange(n_terms)] = 1.0
            factors.append(f)
            slot += 1
    return factors


def min_fiber_mode(shape: Sequence[int]) -> int:
    """Mode whose fiber construction uses the fewest rank-1 terms."""
    total = int(np.prod(shape))
    return int(np.argmin([total // s for s in shape]))


def fiber_rank_bound(shape: Sequence[int]) -> int:
    """``min_m prod_{j != m} shape[j]``, an upper bound on CP rank."""
    total = int(np.prod(shape))
    return min(total // s for s in shape)
