"""Fourier tensor networks.

A continuous signal on ``[0, 1]^C`` is represented as a truncated
generalized Fourier series whose coefficient tensor is kept in CP
(canonical polyadic) form, so evaluation costs ``O(C K R + D R)`` per
point instead of ``O(K^C D)``.
"""

from .basis import BasisKind, BasisSpec, eval_basis, gram_matrix, quadrature_rule
from .errors import ConfigError, DomainError, FutonError, ResolutionError, ShapeError
from .gfs import convergence_curve, eval_gfs, eval_gfs_grid, project_gfs
from .metrics import iou, psnr, ssim
from .model import (
    Activation,
    AxisGrid,
    FutonModel,
    Gradients,
    backward,
    backward_grid,
    forward,
    forward_grid,
    init_model,
    load_checkpoint,
    save_checkpoint,
)
from .operators import RadonOperator, Sinogram, downsample, radon, radon_adjoint, sensor_noise, shepp_logan
from .optim import TrainConfig
from .pipeline import (
    TaskSpec,
    preset,
    run_ablation,
    run_ct,
    run_denoise,
    run_fit,
    run_oracle_compare,
    run_superres,
)
from .tensor import CpFactors, FullCoeffTensor, cp_materialize, fiber_cp_construction

__version__ = "0.1.0"

__all__ = [
    "Activation",
    "AxisGrid",
    "BasisKind",
    "BasisSpec",
    "ConfigError",
    "CpFactors",
    "DomainError",
    "FullCoeffTensor",
    "FutonError",
    "FutonModel",
    "Gradients",
    "RadonOperator",
    "ResolutionError",
    "ShapeError",
    "Sinogram",
    "TaskSpec",
    "TrainConfig",
    "backward",
    "backward_grid",
    "convergence_curve",
    "cp_materialize",
    "downsample",
    "eval_basis",
    "eval_gfs",
    "eval_gfs_grid",
    "fiber_cp_construction",
    "forward",
    "forward_grid",
    "gram_matrix",
    "init_model",
    "iou",
    "load_checkpoint",
    "preset",
    "project_gfs",
    "psnr",
    "quadrature_rule",
    "radon",
    "radon_adjoint",
    "run_ablation",
    "run_ct",
    "run_denoise",
    "run_fit",
    "run_oracle_compare",
    "run_superres",
    "save_checkpoint",
    "sensor_noise",
    "shepp_logan",
    "ssim",
]
