"""Command-line entry point.

Each subcommand starts from the task preset, applies the
JSON document given with ``--config``, then any explicit flags. The
resolved configuration is written next to the other outputs.

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import sys
from pathlib import Path

from PIL import UnidentifiedImageError

from .errors import FutonError
from .operators import Sinogram, shepp_logan
from .pipeline import (
    PRESETS,
    TaskSpec,
    run_ablation,
    run_ct,
    run_denoise,
    run_fit,
    run_oracle_compare,
    run_superres,
)

log = logging.getLogger("futon")

EXIT_CONFIG = 2
EXIT_IO = 3

_ABLATION_PRESET = "fit-image"


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON run configuration")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--input", help="input image (PNG) or volume (raw bytes + .json sidecar)")
    p.add_argument("--seed", type=int)
    p.add_argument("--k", type=int, help="basis functions per input dimension")
    p.add_argument("--rank", type=int, help="CP rank R")
    p.add_argument("--basis", choices=["cosine", "legendre", "chebyshev"])
    p.add_argument("--activation", choices=["tanh", "none"])
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float, help="initial learning rate")
    p.add_argument("--batch-fraction", type=float)
    p.add_argument("--eval-every", type=int)
    p.add_argument("--checkpoint-format", choices=["binary", "json"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="futon", description="Fourier tensor network fitting and inverse problems")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("fit-image", "fit-volume"):
        _add_common(sub.add_parser(name, help=f"{name.replace('-', ' ')} representation"))

    p = sub.add_parser("superres", help="super-resolution from a box-downsampled image")
    _add_common(p)
    p.add_argument("--factor", type=int)

    p = sub.add_parser("denoise", help="denoising with TV regularization")
    _add_common(p)
    p.add_argument("--noisy", help="already-noisy observation (PNG); --input is then the clean reference")
    p.add_argument("--tau", type=float, help="photon mean count")
    p.add_argument("--sigma", type=float, help="readout noise std (counts)")
    p.add_argument("--noise-seed", type=int)
    p.add_argument("--tv-lambda", type=float)

    p = sub.add_parser("ct", help="sparse-view CT from a parallel-beam sinogram")
    _add_common(p)
    p.add_argument("--sinogram", help="measured sinogram CSV (otherwise synthesized from --input)")
    p.add_argument("--phantom", type=int, metavar="N", help="use an N x N Shepp-Logan phantom as ground truth")
    p.add_argument("--angles", type=int)
    p.add_argument("--detectors", type=int)
    p.add_argument("--weight-decay", type=float)

    p = sub.add_parser("ablate", help="rank / K / basis sweeps on an image fit")
    _add_common(p)
    p.add_argument("--kind", choices=["rank", "k", "basis"], required=True)
    p.add_argument("--values", required=True, help="comma-separated sweep values")

    p = sub.add_parser("oracle-compare", help="compare a trained model with the brute-force projected series")
    _add_common(p)
    p.add_argument("--oracle-k", type=int, help="K for the oracle side (must equal --k)")
    return parser


def resolve_spec(args: argparse.Namespace) -> TaskSpec:
    name = args.command
    if name == "ablate":
        base = copy.deepcopy(PRESETS[_ABLATION_PRESET])
    elif name == "oracle-compare":
        base = {"task": "fit-image", "model": {"K": 8, "R": 8, "activation": "none"}, "train": {"batch_fraction": 1.0}}
    else:
        base = copy.deepcopy(PRESETS[name])
    spec = TaskSpec.from_dict(base)

    if args.config is not None:
        doc = json.loads(args.config.read_text())
        if not isinstance(doc, dict):
            raise FutonError("config must be a JSON object")
        if "task" in doc and name not in ("ablate", "oracle-compare") and doc["task"] != name:
            raise FutonError(f"config task {doc['task']!r} does not match subcommand {name!r}")
        spec = spec.updated(**doc)

    model, train, ops, top = {}, {}, {}, {}
    for flag, bucket, key in (
        ("k", model, "K"),
        ("rank", model, "R"),
        ("basis", model, "basis"),
        ("activation", model, "activation"),
        ("seed", train, "seed"),
        ("epochs", train, "epochs"),
        ("lr", train, "lr0"),
        ("batch_fraction", train, "batch_fraction"),
        ("eval_every", train, "eval_every"),
        ("tv_lambda", train, "tv_lambda"),
        ("weight_decay", train, "weight_decay_lambda"),
        ("factor", ops, "factor"),
        ("tau", ops, "photon_mean"),
        ("sigma", ops, "readout_sigma"),
        ("noise_seed", ops, "noise_seed"),
        ("angles", ops, "n_angles"),
        ("detectors", ops, "n_detectors"),
        ("checkpoint_format", top, "checkpoint_format"),
    ):
        val = getattr(args, flag, None)
        if val is not None:
            bucket[key] = val
    if args.input is not None:
        top["input_path"] = args.input
    if args.out is not None:
        top["output_dir"] = str(args.out)
    return spec.updated(model=model, train=train, ops=ops, **top)


def _run(args: argparse.Namespace) -> dict:
    spec = resolve_spec(args)
    cmd = args.command
    if cmd in ("fit-image", "fit-volume"):
        return run_fit(spec).metrics
    if cmd == "superres":
        return run_superres(spec).metrics
    if cmd == "denoise":
        if args.noisy is not None:
            from .io import load_image

            clean = load_image(spec.input_path) if spec.input_path else None
            return run_denoise(spec, clean=clean, noisy=load_image(args.noisy)).metrics
        return run_denoise(spec).metrics
    if cmd == "ct":
        image = shepp_logan(args.phantom) if args.phantom else None
        sino = Sinogram.load_csv(args.sinogram) if args.sinogram else None
        if image is None and sino is None and spec.input_path is None:
            raise FutonError("ct needs --input, --phantom or --sinogram")
        if image is None and spec.input_path is not None:
            from .io import load_image

            image = load_image(spec.input_path)
        return run_ct(spec, image, sino).metrics
    if cmd == "ablate":
        values = [v.strip() for v in args.values.split(",") if v.strip()]
        if args.kind != "basis":
            values = [int(v) for v in values]
        rows = run_ablation(args.kind, spec, values)
        return {"rows": rows}
    return run_oracle_compare(spec, oracle_K=args.oracle_k)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        result = _run(args)
    except (OSError, UnidentifiedImageError) as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    except (FutonError, ValueError, KeyError, TypeError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    print(json.dumps(result, indent=2, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
