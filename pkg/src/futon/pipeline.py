"""Experiment pipelines: fitting, super-resolution, denoising, CT, ablations.

Every run is a pure function of its :class:`TaskSpec` and input data.
Model initialization draws from ``seed`` and minibatch sampling from an
independent stream derived from the same seed, so reruns are bitwise
identical. Wall-clock columns come from the injectable ``clock``.
"""

from __future__ import annotations

import copy
import csv
import enum
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import io as fio
from .basis import BasisKind, BasisSpec
from .errors import ConfigError, ResolutionError, ShapeError
from .gfs import eval_gfs_grid, grid_coordinates, project_gfs
from .metrics import from_unit_range, iou, psnr, ssim, to_unit_range
from .model import (
    Activation,
    AxisGrid,
    FutonModel,
    Gradients,
    backward_grid,
    backward_points,
    forward_grid,
    forward_points,
    init_model,
    save_checkpoint,
)
from .operators import RadonOperator, Sinogram, bilinear_upsample, default_angles, downsample, sensor_noise
from .optim import TrainConfig, adam_init, adam_step, cosine_anneal, mse_loss, sample_batch, tv_loss
from .tensor import fiber_rank_bound

__all__ = [
    "Task",
    "ModelConfig",
    "OperatorConfig",
    "TaskSpec",
    "PRESETS",
    "preset",
    "CurveRow",
    "RunResult",
    "train",
    "run_fit",
    "run_superres",
    "run_denoise",
    "run_ct",
    "run_ablation",
    "run_oracle_compare",
    "write_curve",
]

Clock = Callable[[], float]


class Task(str, enum.Enum):
    FIT_IMAGE = "fit-image"
    FIT_VOLUME = "fit-volume"
    SUPERRES = "superres"
    DENOISE = "denoise"
    CT = "ct"


_TASK_DIMS = {
    Task.FIT_IMAGE: 2,
    Task.FIT_VOLUME: 3,
    Task.SUPERRES: 2,
    Task.DENOISE: 2,
    Task.CT: 2,
}


@dataclass
class ModelConfig:
    K: int = 64
    R: int = 64
    basis: str = "cosine"
    activation: str = "tanh"

    def __post_init__(self):
        try:
            self.basis = BasisKind(self.basis).value
            self.activation = Activation(self.activation).value
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if int(self.K) != self.K or self.K < 1 or int(self.R) != self.R or self.R < 1:
            raise ConfigError(f"K and R must be positive integers, got K={self.K!r}, R={self.R!r}")


@dataclass
class OperatorConfig:
    factor: int = 4
    photon_mean: float = 50.0
    readout_sigma: float = 1.0
    noise_seed: int = 0
    n_angles: int = 150
    n_detectors: int | None = None
    image_size: int | None = None
    occupancy_threshold: float = 0.0


@dataclass
class TaskSpec:
    task: Task
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    ops: OperatorConfig = field(default_factory=OperatorConfig)
    input_path: str | None = None
    output_dir: str | None = None
    checkpoint_format: str = "binary"

    def __post_init__(self):
        try:
            self.task = Task(self.task)
        except ValueError:
            raise ConfigError(f"unknown task {self.task!r}") from None
        if self.checkpoint_format not in ("binary", "json"):
            raise ConfigError(f"checkpoint_format must be 'binary' or 'json', got {self.checkpoint_format!r}")

    @property
    def C(self) -> int:
        return _TASK_DIMS[self.task]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["task"] = self.task.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TaskSpec":
        d = dict(d)
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            model = ModelConfig(**d.pop("model", {}))
            train_cfg = TrainConfig(**d.pop("train", {}))
            ops = OperatorConfig(**d.pop("ops", {}))
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        return cls(model=model, train=train_cfg, ops=ops, **d)

    def updated(self, **changes) -> "TaskSpec":
        """Copy with nested overrides, e.g. ``updated(model={"R": 8})``."""
        d = self.to_dict()
        for key, val in changes.items():
            if isinstance(val, dict):
                d[key] = {**d[key], **val}
            else:
                d[key] = val
        return TaskSpec.from_dict(d)

    def check_dims(self, C: int, D: int) -> None:
        if C != self.C:
            raise ConfigError(f"task {self.task.value} needs C={self.C} input dims, data has C={C}")
        if self.task is Task.CT and D != 1:
            raise ConfigError(f"CT reconstructs single-channel slices, data has D={D}")


PRESETS: dict[str, dict] = {
    "fit-image": {"task": "fit-image", "model": {"K": 512, "R": 512}},
    "fit-volume": {"task": "fit-volume", "model": {"K": 256, "R": 256}},
    "superres": {"task": "superres", "model": {"K": 384, "R": 384}, "ops": {"factor": 4}},
    "denoise": {
        "task": "denoise",
        "model": {"K": 256, "R": 256},
        "train": {"tv_lambda": 1e-7},
        "ops": {"photon_mean": 50.0, "readout_sigma": 1.0},
    },
    "ct": {
        "task": "ct",
        "model": {"K": 256, "R": 256},
        "train": {"epochs": 4000, "weight_decay_lambda": 4e-3},
        "ops": {"n_angles": 150},
    },
}


def preset(name: str, **overrides) -> TaskSpec:
    """The named default configuration, with optional nested overrides."""
    if name not in PRESETS:
        raise ConfigError(f"no preset named {name!r}; choose from {sorted(PRESETS)}")
    return TaskSpec.from_dict(copy.deepcopy(PRESETS[name])).updated(**overrides)


# --- training ---------------------------------------------------------------


@dataclass
class CurveRow:
    step: int
    wall_seconds: float
    lr: float
    train_loss: float
    eval_psnr: float | None = None


@dataclass
class RunResult:
    model: FutonModel
    metrics: dict
    curve: list[CurveRow]
    reconstruction: np.ndarray


GridTerm = Callable[[np.ndarray], tuple[float, np.ndarray]]


def train(
    model: FutonModel,
    cfg: TrainConfig,
    grid: AxisGrid,
    *,
    target: np.ndarray | None = None,
    grid_terms: Sequence[tuple[float, GridTerm]] = (),
    eval_fn: Callable[[FutonModel], float] | None = None,
    clock: Clock = time.perf_counter,
) -> list[CurveRow]:
    """Optimize ``model`` in place with Adam under a cosine schedule.

    Parameters
    ----------
    target : array of shape ``grid.shape + (D,)``, optional
        Enables the minibatch MSE term: each step samples
        ``batch_fraction`` of the grid nodes.
    grid_terms : sequence of ``(weight, fn)``
        Full-grid terms; ``fn(prediction)`` returns ``(value, d value / d prediction)``
        with ``prediction`` of shape ``grid.shape + (D,)``. Terms with zero
        weight are skipped entirely.
    eval_fn
        Called after the update every ``cfg.eval_every`` steps and at the
        last step; its return value fills the ``eval_psnr`` column.

    ``train_loss`` records the data and grid terms before the update;
    weight decay enters the gradient only.
    """
    grid_terms = [(w, fn) for w, fn in grid_terms if w != 0.0]
    if target is None and not grid_terms:
        raise ConfigError("nothing to train on: no target and no grid terms")
    params = model.parameters()
    state = adam_init(params)
    rng = np.random.default_rng([cfg.seed, 1])
    flat_target = None
    if target is not None:
        if target.shape != grid.shape + (model.D,):
            raise ShapeError(f"target shape {target.shape} != {grid.shape + (model.D,)}")
        flat_target = target.reshape(-1, model.D)

    T = cfg.epochs
    t0 = clock()
    rows: list[CurveRow] = []
    for step in range(T):
        lr = cosine_anneal(step, T - 1, cfg.lr0, cfg.lr_final_ratio)
        loss = 0.0
        grads: Gradients | None = None
        if flat_target is not None:
            idx = sample_batch(rng, grid.size, cfg.batch_fraction)
            out, cache = forward_points(model, grid, idx)
            val, d_out = mse_loss(out, flat_target[idx])
            loss += val
            grads = backward_points(model, grid, idx, d_out, cache)
        if grid_terms:
            pre = forward_grid(model, grid, pre_activation=True)
            pred = np.tanh(pre) if model.activation is Activation.TANH else pre
            upstream = np.zeros_like(pred)
            for weight, fn in grid_terms:
                val, d_pred = fn(pred)
                loss += weight * val
                upstream += weight * d_pred
            g_grid = backward_grid(model, grid, upstream, pre=pre)
            grads = g_grid if grads is None else grads + g_grid
        glist = grads.as_list()
        if cfg.weight_decay_lambda > 0:
            glist = [g + cfg.weight_decay_lambda * p for g, p in zip(glist, params)]
        adam_step(params, glist, state, lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)

        ev = None
        if eval_fn is not None and (step % cfg.eval_every == 0 or step == T - 1):
            ev = float(eval_fn(model))
        rows.append(CurveRow(step, clock() - t0, lr, loss, ev))
    return rows


def write_curve(path, rows: Sequence[CurveRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "wall_seconds", "lr", "train_loss", "eval_psnr"])
        for r in rows:
            ev = "" if r.eval_psnr is None else repr(r.eval_psnr)
            w.writerow([r.step, repr(r.wall_seconds), repr(r.lr), repr(r.train_loss), ev])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else ("inf" if f > 0 else "-inf" if f < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _write_common(spec: TaskSpec, model: FutonModel, rows, metrics) -> Path | None:
    if spec.output_dir is None:
        return None
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    ckpt = out / ("model.json" if spec.checkpoint_format == "json" else "model.ckpt")
    save_checkpoint(model, ckpt)
    write_curve(out / "curve.csv", rows)
    (out / "resolved_config.json").write_text(json.dumps(_jsonable(spec.to_dict()), indent=2, sort_keys=True))
    (out / "metrics.json").write_text(json.dumps(_jsonable(metrics), indent=2, sort_keys=True))
    return out


def _build(spec: TaskSpec, C: int, D: int, R: int | None = None, activation=None) -> FutonModel:
    spec.check_dims(C, D)
    m = spec.model
    return init_model(
        C, m.K, m.R if R is None else R, D, m.basis, m.activation if activation is None else activation, spec.train.seed
    )


def _midpoint_grid(basis: BasisSpec, shape: Sequence[int]) -> AxisGrid:
    return AxisGrid(basis, [grid_coordinates(n) for n in shape])


def _image_metrics(recon_unit: np.ndarray, ref_unit: np.ndarray) -> dict:
    out = {"psnr": psnr(recon_unit, ref_unit)}
    if min(ref_unit.shape[:2]) >= 11:
        out["ssim"] = ssim(recon_unit, ref_unit)
    return out


def _as_image(a, name="image") -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 2:
        a = a[..., None]
    if a.ndim != 3:
        raise ConfigError(f"{name} must be 2-D with optional channel axis, got shape {a.shape}")
    return a


def _load_input(spec: TaskSpec, data, volume: bool = False) -> np.ndarray:
    if data is not None:
        return np.asarray(data, dtype=np.float64)
    if spec.input_path is None:
        raise ConfigError(f"task {spec.task.value} needs input data or input_path")
    return fio.load_volume(spec.input_path) if volume else fio.load_image(spec.input_path)


# --- pipelines --------------------------------------------------------------


def run_fit(spec: TaskSpec, data=None, *, clock: Clock = time.perf_counter) -> RunResult:
    """Fit an image (``(H, W[, D])`` in [0, 1]) or occupancy volume (``(X, Y, Z)`` in {0, 1})."""
    if spec.task not in (Task.FIT_IMAGE, Task.FIT_VOLUME):
        raise ConfigError(f"run_fit cannot run task {spec.task.value}")
    volume = spec.task is Task.FIT_VOLUME
    raw = _load_input(spec, data, volume)
    if volume:
        if raw.ndim == 4 and raw.shape[-1] == 1:
            raw = raw[..., 0]
        if raw.ndim != 3:
            raise ConfigError(f"fit-volume needs a 3-D occupancy grid, got shape {raw.shape}")
        unit = (raw > 0.5).astype(np.float64)[..., None]
    else:
        unit = _as_image(raw)
    target = from_unit_range(unit)
    model = _build(spec, unit.ndim - 1, unit.shape[-1])
    grid = _midpoint_grid(model.basis, unit.shape[:-1])

    if volume:
        thr = spec.ops.occupancy_threshold

        def evaluate(m):
            return iou(forward_grid(m, grid), target, thr)
    else:

        def evaluate(m):
            return psnr(to_unit_range(forward_grid(m, grid)), unit)

    rows = train(model, spec.train, grid, target=target, eval_fn=evaluate, clock=clock)
    recon = forward_grid(model, grid)
    if volume:
        metrics = {"iou": iou(recon, target, spec.ops.occupancy_threshold)}
    else:
        metrics = _image_metrics(to_unit_range(recon), unit)
    metrics.update(n_params=model.n_params, final_train_loss=rows[-1].train_loss)

    out = _write_common(spec, model, rows, metrics)
    if out is not None:
        if volume:
            fio.save_volume(out / "reconstruction.raw", (recon[..., 0] > spec.ops.occupancy_threshold))
        else:
            fio.save_image(out / "reconstruction.png", to_unit_range(recon))
    return RunResult(model, metrics, rows, recon)


def run_superres(spec: TaskSpec, image=None, *, clock: Clock = time.perf_counter) -> RunResult:
    """Train on the box-downsampled image, evaluate on the original grid."""
    if spec.task is not Task.SUPERRES:
        raise ConfigError(f"run_superres cannot run task {spec.task.value}")
    gt = _as_image(_load_input(spec, image))
    f = spec.ops.factor
    low = downsample(gt, f)
    gt = gt[: low.shape[0] * f, : low.shape[1] * f]
    model = _build(spec, 2, gt.shape[-1])
    low_grid = _midpoint_grid(model.basis, low.shape[:2])
    high_grid = _midpoint_grid(model.basis, gt.shape[:2])

    def evaluate(m):
        return psnr(to_unit_range(forward_grid(m, high_grid)), gt)

    rows = train(model, spec.train, low_grid, target=from_unit_range(low), eval_fn=evaluate, clock=clock)
    recon = forward_grid(model, high_grid)
    metrics = _image_metrics(to_unit_range(recon), gt)
    metrics["bilinear_psnr"] = psnr(np.clip(bilinear_upsample(low, gt.shape[:2]), 0.0, 1.0), gt)
    metrics["lowres_psnr"] = psnr(to_unit_range(forward_grid(model, low_grid)), low)
    metrics["n_params"] = model.n_params

    out = _write_common(spec, model, rows, metrics)
    if out is not None:
        fio.save_image(out / "reconstruction.png", to_unit_range(recon))
    return RunResult(model, metrics, rows, recon)


def run_denoise(spec: TaskSpec, clean=None, noisy=None, *, clock: Clock = time.perf_counter) -> RunResult:
    """Fit a noisy image with MSE plus ``tv_lambda`` times TV of the full-grid prediction.

    Without ``noisy``, noise is synthesized from ``clean`` using the
    operator settings and ``ops.noise_seed``.
    """
    if spec.task is not Task.DENOISE:
        raise ConfigError(f"run_denoise cannot run task {spec.task.value}")
    if clean is None and noisy is None:
        clean = _load_input(spec, None)
    clean = None if clean is None else _as_image(clean, "clean image")
    if noisy is None:
        noisy = sensor_noise(clean, spec.ops.photon_mean, spec.ops.readout_sigma, spec.ops.noise_seed)
    noisy = _as_image(noisy, "noisy image")
    if clean is not None and clean.shape != noisy.shape:
        raise ShapeError(f"clean {clean.shape} and noisy {noisy.shape} differ")
    model = _build(spec, 2, noisy.shape[-1])
    grid = _midpoint_grid(model.basis, noisy.shape[:2])
    ref = clean if clean is not None else noisy

    def evaluate(m):
        return psnr(to_unit_range(forward_grid(m, grid)), ref)

    rows = train(
        model,
        spec.train,
        grid,
        target=from_unit_range(noisy),
        grid_terms=[(spec.train.tv_lambda, tv_loss)],
        eval_fn=evaluate,
        clock=clock,
    )
    recon = forward_grid(model, grid)
    metrics = {"n_params": model.n_params}
    if clean is not None:
        metrics["noisy_psnr"] = psnr(noisy, clean)
        metrics.update(_image_metrics(to_unit_range(recon), clean))

    out = _write_common(spec, model, rows, metrics)
    if out is not None:
        fio.save_image(out / "reconstruction.png", to_unit_range(recon))
        fio.save_image(out / "noisy.png", noisy)
    return RunResult(model, metrics, rows, recon)


def _ct_term(op: RadonOperator, measured: np.ndarray) -> GridTerm:
    # The model predicts in [-1, 1]; line integrals are of intensity (s + 1) / 2.
    def term(pred):
        intensity = to_unit_range(pred[..., 0])
        res = op.forward(intensity) - measured
        d_int = op.adjoint(2.0 * res)
        return float(np.sum(res * res)), (0.5 * d_int)[..., None]

    return term


def run_ct(spec: TaskSpec, image=None, sinogram: Sinogram | None = None, *, clock: Clock = time.perf_counter) -> RunResult:
    """Reconstruct a slice by fitting its parallel-beam sinogram.

    With ``image`` (a square [0, 1] slice) the measurement is synthesized
    with ``ops.n_angles`` angles; with ``sinogram`` it is used as is and
    ``image`` (if also given) only serves as the evaluation reference.
    """
    if spec.task is not Task.CT:
        raise ConfigError(f"run_ct cannot run task {spec.task.value}")
    gt = None
    if image is not None or sinogram is None:
        gt = _as_image(_load_input(spec, image))
        if gt.shape[0] != gt.shape[1]:
            raise ShapeError(f"CT needs a square slice, got {gt.shape[:2]}")
        if gt.shape[-1] != 1:
            raise ConfigError(f"CT reconstructs single-channel slices, data has D={gt.shape[-1]}")
    if sinogram is not None:
        n = gt.shape[0] if gt is not None else (spec.ops.image_size or sinogram.n_detectors)
        op = RadonOperator(n, sinogram.angles, sinogram.n_detectors)
        measured = sinogram.data
    else:
        n = gt.shape[0]
        op = RadonOperator(n, default_angles(spec.ops.n_angles), spec.ops.n_detectors)
        measured = op.forward(gt[..., 0])

    model = _build(spec, 2, 1)
    grid = _midpoint_grid(model.basis, (n, n))

    def evaluate(m):
        return psnr(to_unit_range(forward_grid(m, grid)), gt)

    rows = train(
        model,
        spec.train,
        grid,
        grid_terms=[(1.0, _ct_term(op, measured))],
        eval_fn=evaluate if gt is not None else None,
        clock=clock,
    )
    recon = to_unit_range(forward_grid(model, grid))
    sino_fit = op.forward(recon[..., 0])
    metrics = {
        "n_params": model.n_params,
        "sinogram_mse": float(np.mean((sino_fit - measured) ** 2)),
        "sinogram_relative_residual": float(np.linalg.norm(sino_fit - measured) / max(np.linalg.norm(measured), 1e-300)),
    }
    if gt is not None:
        metrics.update(_image_metrics(recon, gt))

    out = _write_common(spec, model, rows, metrics)
    if out is not None:
        fio.save_image(out / "reconstruction.png", recon)
        Sinogram(sino_fit, op.angles, op.detector_spacing).save_csv(out / "reconstruction_sinogram.csv")
    return RunResult(model, metrics, rows, recon)


class AblationKind(str, enum.Enum):
    RANK = "rank"
    K = "k"
    BASIS = "basis"


ABLATION_COLUMNS = ["value", "K", "R", "basis", "n_params", "psnr", "ssim", "img_per_s"]


def run_ablation(
    kind: AblationKind | str,
    base: TaskSpec,
    values: Sequence,
    image=None,
    *,
    clock: Clock = time.perf_counter,
    speed_repeats: int = 3,
) -> list[dict]:
    """One image fit per value with everything else fixed; one table row per run.

    ``img_per_s`` is full-grid inferences per second, timed with ``clock``.
    """
    kind = AblationKind(kind)
    if not values:
        raise ConfigError("ablation needs at least one value")
    if base.task is not Task.FIT_IMAGE:
        raise ConfigError("ablations run on the fit-image task")
    img = _as_image(_load_input(base, image))
    rows = []
    for v in values:
        if kind is AblationKind.RANK:
            change = {"R": int(v)}
        elif kind is AblationKind.K:
            change = {"K": int(v)}
        else:
            change = {"basis": str(v)}
        sub_out = None if base.output_dir is None else str(Path(base.output_dir) / f"{kind.value}_{v}")
        spec = base.updated(model=change, output_dir=sub_out)
        res = run_fit(spec, img, clock=clock)
        grid = _midpoint_grid(res.model.basis, img.shape[:2])
        t0 = clock()
        for _ in range(speed_repeats):
            forward_grid(res.model, grid)
        dt = clock() - t0
        rows.append(
            {
                "value": v,
                "K": res.model.K,
                "R": res.model.R,
                "basis": res.model.basis.kind.value,
                "n_params": res.model.n_params,
                "psnr": res.metrics["psnr"],
                "ssim": res.metrics.get("ssim", float("nan")),
                "img_per_s": speed_repeats / dt if dt > 0 else float("inf"),
            }
        )
    if base.output_dir is not None:
        out = Path(base.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "ablation.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=ABLATION_COLUMNS)
            w.writeheader()
            for r in rows:
                w.writerow({k: (repr(x) if isinstance(x, float) else x) for k, x in r.items()})
        (out / "resolved_config.json").write_text(json.dumps(_jsonable(base.to_dict()), indent=2, sort_keys=True))
    return rows


def run_oracle_compare(
    spec: TaskSpec,
    target=None,
    oracle_K: int | None = None,
    *,
    clock: Clock = time.perf_counter,
    abs_floor: float = 1e-6,
) -> dict:
    """Compare a trained full-construction-rank model with the projected series.

    ``target`` is a [0, 1] grid signal ``(N_1, ..., N_C, D)``; both sides
    work in the model's [-1, 1] range with a linear output. The model uses
    rank ``K^(C-1) min(K, D)``, enough to represent the oracle's tensor
    exactly, so its least-squares fit should match or beat the projection.
    The check passes when ``futon_mse <= 1.1 * oracle_mse`` or both are
    below ``abs_floor``.
    """
    K = spec.model.K
    if oracle_K is not None and oracle_K != K:
        raise ConfigError(f"model K={K} differs from oracle K={oracle_K}")
    if K > 16:
        raise ResolutionError(f"oracle comparison is limited to K <= 16, got {K}")
    sig = np.asarray(_load_input(spec, target), dtype=np.float64)
    unit = sig if sig.ndim == spec.C + 1 else sig[..., None]
    C, D = unit.ndim - 1, unit.shape[-1]
    spec.check_dims(C, D)
    s = from_unit_range(unit)

    basis = BasisSpec(spec.model.basis, K)
    w = project_gfs(s, basis)
    oracle_mse = float(np.mean((eval_gfs_grid(w, basis, s.shape[:-1]) - s) ** 2))

    R = fiber_rank_bound(w.shape)
    model = _build(spec, C, D, R=R, activation=Activation.NONE)
    grid = _midpoint_grid(basis, s.shape[:-1])
    rows = train(model, spec.train, grid, target=s, clock=clock)
    futon_mse = float(np.mean((forward_grid(model, grid) - s) ** 2))

    report = {
        "K": K,
        "R": R,
        "oracle_mse": oracle_mse,
        "futon_mse": futon_mse,
        "ratio": futon_mse / oracle_mse if oracle_mse > 0 else math.inf,
        "passed": bool(futon_mse <= 1.1 * oracle_mse or max(futon_mse, oracle_mse) < abs_floor),
    }
    _write_common(spec, model, rows, report)
    return report
