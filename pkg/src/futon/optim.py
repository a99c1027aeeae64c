"""Adam, the learning-rate schedule, minibatch sampling and regularizers."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, DomainError, ShapeError

__all__ = [
    "TrainConfig",
    "AdamState",
    "adam_init",
    "adam_step",
    "cosine_anneal",
    "sample_batch",
    "mse_loss",
    "tv_loss",
    "weight_decay_grad",
]

TV_EPS = 1e-8


@dataclass
class TrainConfig:
    """Training hyperparameters. One epoch is one minibatch step."""

    epochs: int = 2000
    batch_fraction: float = 0.1
    lr0: float = 1e-2
    lr_final_ratio: float = 0.1
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    tv_lambda: float = 0.0
    weight_decay_lambda: float = 0.0
    seed: int = 0
    eval_every: int = 100

    def __post_init__(self):
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ConfigError(f"epochs must be a positive integer, got {self.epochs!r}")
        if not 0.0 < self.batch_fraction <= 1.0:
            raise ConfigError(f"batch_fraction must be in (0, 1], got {self.batch_fraction!r}")
        if not 0.0 < self.lr_final_ratio <= 1.0:
            raise ConfigError(f"lr_final_ratio must be in (0, 1], got {self.lr_final_ratio!r}")
        if self.lr0 <= 0:
            raise ConfigError(f"lr0 must be positive, got {self.lr0!r}")
        if self.tv_lambda < 0 or self.weight_decay_lambda < 0:
            raise ConfigError("regularization weights must be non-negative")
        if self.eval_every < 1:
            raise ConfigError("eval_every must be >= 1")
        self.epochs = int(self.epochs)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0


def adam_init(params: Sequence[np.ndarray]) -> AdamState:
    return AdamState([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params], 0)


def adam_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[Sequence[np.ndarray], AdamState]:
    """One bias-corrected Adam update, applied to ``params`` in place."""
    if lr <= 0:
        raise DomainError(f"learning rate must be positive, got {lr!r}")
    if not (len(params) == len(grads) == len(state.m) == len(state.v)):
        raise ShapeError("params, grads and optimizer state differ in length")
    state.t += 1
    bc1 = 1.0 - beta1**state.t
    bc2 = 1.0 - beta2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if not (p.shape == g.shape == m.shape == v.shape):
            raise ShapeError(f"shape mismatch: param {p.shape}, grad {g.shape}")
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
    return params, state


def cosine_anneal(t: int, T: int, lr0: float, ratio: float = 0.1) -> float:
    """Cosine decay from ``lr0`` at ``t = 0`` to ``ratio * lr0`` at ``t = T``."""
    if t < 0 or t > T:
        raise DomainError(f"step {t} outside [0, {T}]")
    lr_end = ratio * lr0
    if T == 0:
        return lr0
    # Written as a decrement from lr0 so that t = 0 returns lr0 exactly.
    return lr0 - (lr0 - lr_end) * (1.0 - math.cos(math.pi * t / T)) / 2.0


def sample_batch(rng: np.random.Generator, N: int, fraction: float) -> np.ndarray:
    """``ceil(fraction * N)`` distinct indices drawn uniformly without replacement, sorted."""
    if not 0.0 < fraction <= 1.0:
        raise DomainError(f"fraction must be in (0, 1], got {fraction!r}")
    # round() guards against 0.1 * 30 = 3.0000000000000004 style overshoot.
    size = min(N, max(1, math.ceil(round(fraction * N, 9))))
    if size == N:
        return np.arange(N)
    return np.sort(rng.choice(N, size=size, replace=False))


def mse_loss(pred, target) -> tuple[float, np.ndarray]:
    """Mean squared error over all elements and its gradient w.r.t. ``pred``."""
    diff = np.asarray(pred, dtype=np.float64) - np.asarray(target, dtype=np.float64)
    return float(np.mean(diff * diff)), 2.0 * diff / diff.size


def tv_loss(pred, eps: float = TV_EPS) -> tuple[float, np.ndarray]:
    """Isotropic smoothed total variation of a 2-D image and its exact gradient.

    ``TV(u) = sum_{i,j,d} sqrt(dx^2 + dy^2 + eps^2)`` with forward differences
    and zero difference across the last row/column. Accepts ``(H, W)`` or
    ``(H, W, D)`` arrays.
    """
    u = np.asarray(pred, dtype=np.float64)
    squeeze = u.ndim == 2
    if squeeze:
        u = u[..., None]
    if u.ndim != 3:
        raise ShapeError(f"tv_loss expects a 2-D image (H, W[, D]), got shape {np.shape(pred)}")
    dy = np.zeros_like(u)
    dx = np.zeros_like(u)
    dy[:-1] = u[1:] - u[:-1]
    dx[:, :-1] = u[:, 1:] - u[:, :-1]
    mag = np.sqrt(dx * dx + dy * dy + eps * eps)
    py = dy / mag
    px = dx / mag
    grad = -(py + px)
    grad[1:] += py[:-1]
    grad[:, 1:] += px[:, :-1]
    if squeeze:
        grad = grad[..., 0]
    return float(mag.sum()), grad


def weight_decay_grad(params: Sequence[np.ndarray], lam: float) -> list[np.ndarray]:
    """Gradient of ``0.5 * lam * ||theta||^2``."""
    if lam < 0:
        raise DomainError(f"weight decay must be non-negative, got {lam!r}")
    return [lam * p for p in params]
