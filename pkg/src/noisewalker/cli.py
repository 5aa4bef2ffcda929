"""Command line interface: segment, bench-spiral, eval, serve."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import evaluation, image_io, synth_bench
from .graph_core import SeedMap, SolverConvergenceError, segment
from .noise_models import model_from_name

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--model",
        required=True,
        choices=["poisson", "const-gauss", "var-gauss", "grady"],
        help="noise model for the edge weights",
    )
    p.add_argument("--beta", type=float, help="scale parameter (grady model only)")
    p.add_argument("--k", type=int, default=1, help="window radius (side 2k+1)")
    p.add_argument("--threads", type=int, help="worker thread cap")
    p.add_argument("--seed", type=int, default=0, help="RNG seed where applicable")


def _model_from_args(args) -> object:
    return model_from_name(args.model, beta=args.beta)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noisewalker",
        description="Noise-model-aware random walker segmentation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_seg = sub.add_parser("segment", help="segment an image from a seeds file")
    p_seg.add_argument("--image", required=True, help="input image (path or pair 'a,b')")
    p_seg.add_argument("--seeds", required=True, help="seeds JSON file")
    p_seg.add_argument("--out", required=True, help="output label map (indexed PNG)")
    p_seg.add_argument("--prob-dir", help="directory for per-label probability PFMs")
    _add_model_args(p_seg)

    p_bench = sub.add_parser("bench-spiral", help="synthetic spiral accuracy benchmark")
    p_bench.add_argument("--noise", required=True, choices=["poisson", "loupas", "gauss2d"])
    p_bench.add_argument(
        "--levels",
        help="poisson: comma-separated lo:hi rate pairs; loupas/gauss2d: sigma values",
    )
    p_bench.add_argument("--n", type=int, default=20, help="noise realizations per level")
    p_bench.add_argument(
        "--models",
        required=True,
        help="comma-separated: poisson | const-gauss | var-gauss | grady:auto | grady:<beta>",
    )
    p_bench.add_argument("--size", type=int, default=64, help="spiral side length")
    p_bench.add_argument("--turns", type=float, default=synth_bench.DEFAULT_TURNS)
    p_bench.add_argument("--k", type=int, default=1)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--threads", type=int)
    p_bench.add_argument("--out", required=True, help="output CSV path")

    p_eval = sub.add_parser("eval", help="seed-placement trajectory on one image")
    p_eval.add_argument("--image", required=True)
    p_eval.add_argument("--truth", required=True, help="ground-truth label PNG")
    p_eval.add_argument("--max-seeds", type=int, default=10)
    p_eval.add_argument("--out", required=True, help="output base path (.csv and .json)")
    _add_model_args(p_eval)

    p_serve = sub.add_parser("serve", help="run the interactive segmentation service")
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--static", help="directory with the browser UI")
    p_serve.add_argument("--max-pixels", type=int, default=4_194_304)
    p_serve.add_argument("--threads", type=int)

    return parser


def _apply_thread_cap(args) -> None:
    threads = getattr(args, "threads", None)
    if threads:
        import os

        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(threads)


def cmd_segment(args) -> int:
    image = image_io.read_image(args.image)
    seed_pts = image_io.read_seeds_json(args.seeds)
    seeds = SeedMap.from_points(image.shape[:2], seed_pts)
    model = _model_from_args(args)
    field, labels = segment(image, seeds, model, k=args.k)
    image_io.write_label_png(args.out, labels)
    if args.prob_dir:
        prob_dir = Path(args.prob_dir)
        prob_dir.mkdir(parents=True, exist_ok=True)
        for i, label in enumerate(field.labels):
            image_io.write_pfm(prob_dir / f"prob_{int(label)}.pfm", field.probabilities[i])
    return EXIT_OK


def _parse_levels(args) -> list[synth_bench.NoiseSpec]:
    specs = []
    if args.noise == "poisson":
        raw = args.levels or ",".join(f"{a:g}:{b:g}" for a, b in synth_bench.POISSON_LEVEL_LADDER)
        for tok in raw.split(","):
            lo, _, hi = tok.partition(":")
            specs.append(
                synth_bench.NoiseSpec(
                    kind="poisson",
                    level=(float(lo), float(hi)),
                    seed=args.seed,
                    realizations=args.n,
                )
            )
    else:
        raw = args.levels or "0.1,0.3,0.5"
        for tok in raw.split(","):
            specs.append(
                synth_bench.NoiseSpec(
                    kind=args.noise,
                    level=(0.1, 1.0) if args.noise == "loupas" else None,
                    sigma=float(tok),
                    seed=args.seed,
                    realizations=args.n,
                )
            )
    return specs


def cmd_bench_spiral(args) -> int:
    variant = "vector" if args.noise == "gauss2d" else "scalar"
    spec = synth_bench.SpiralSpec(size=args.size, turns=args.turns, variant=variant)
    noise_specs = _parse_levels(args)
    models = [t.strip() for t in args.models.split(",") if t.strip()]
    rows = synth_bench.run_spiral_experiment(spec, noise_specs, models, k=args.k)
    image_io.atomic_write_bytes(args.out, synth_bench.rows_to_csv(rows).encode())
    return EXIT_OK


def cmd_eval(args) -> int:
    image = image_io.read_image(args.image)
    truth = image_io.read_label_png(args.truth)
    model = _model_from_args(args)
    trajectory = evaluation.run_trajectory(image, truth, model, args.max_seeds, k=args.k)
    base = Path(args.out)
    rows = trajectory.to_rows()
    import io as _io

    buf = _io.StringIO()
    writer = csv.DictWriter(
        buf, fieldnames=list(evaluation.TRAJECTORY_CSV_COLUMNS), lineterminator="\n"
    )
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    image_io.atomic_write_bytes(base.with_suffix(".csv"), buf.getvalue().encode())
    report = {"steps": rows, "first_reaching": trajectory.first_reaching}
    image_io.atomic_write_bytes(
        base.with_suffix(".json"), json.dumps(report, indent=2).encode()
    )
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(max_pixels=args.max_pixels, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors
        return int(exc.code or 0)
    _apply_thread_cap(args)
    handler = {
        "segment": cmd_segment,
        "bench-spiral": cmd_bench_spiral,
        "eval": cmd_eval,
        "serve": cmd_serve,
    }[args.command]
    try:
        return handler(args)
    except SolverConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
