#!/usr/bin/env python3
"""Desk-scale spiral benchmark: accuracy of every applicable model per noise level.

Writes one CSV per noise family into --outdir. Mirrors the quantitative
synthetic-data comparison: Poisson rates from bright to dim, intensity-scaled
Gaussian (Loupas) at increasing sigma, and 2-D Gaussian noise on the vector
spiral, each against the tuned-beta baseline.
"""

import argparse
from pathlib import Path

from noisewalker import synth_bench as sb
from noisewalker.image_io import atomic_write_bytes


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="bench_results")
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--realizations", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    spec = sb.SpiralSpec(size=args.size)
    vspec = sb.SpiralSpec(size=args.size, variant="vector")

    poisson_noise = [
        sb.NoiseSpec(kind="poisson", level=lvl, seed=args.seed, realizations=args.realizations)
        for lvl in sb.POISSON_LEVEL_LADDER
    ]
    rows = sb.run_spiral_experiment(
        spec, poisson_noise, ["poisson", "var-gauss", "grady:auto"]
    )
    atomic_write_bytes(outdir / "poisson.csv", sb.rows_to_csv(rows).encode())
    print(f"wrote {outdir / 'poisson.csv'} ({len(rows)} rows)")

    loupas_noise = [
        sb.NoiseSpec(
            kind="loupas", level=(0.1, 1.0), sigma=s, seed=args.seed,
            realizations=args.realizations,
        )
        for s in (0.1, 0.2, 0.3, 0.4, 0.5)
    ]
    rows = sb.run_spiral_experiment(spec, loupas_noise, ["var-gauss", "grady:auto"])
    atomic_write_bytes(outdir / "loupas.csv", sb.rows_to_csv(rows).encode())
    print(f"wrote {outdir / 'loupas.csv'} ({len(rows)} rows)")

    gauss_noise = [
        sb.NoiseSpec(kind="gauss2d", sigma=s, seed=args.seed, realizations=args.realizations)
        for s in (0.1, 0.3, 0.5, 0.7, 1.0)
    ]
    rows = sb.run_spiral_experiment(vspec, gauss_noise, ["const-gauss", "grady:auto"])
    atomic_write_bytes(outdir / "gauss2d.csv", sb.rows_to_csv(rows).encode())
    print(f"wrote {outdir / 'gauss2d.csv'} ({len(rows)} rows)")


if __name__ == "__main__":
    main()
