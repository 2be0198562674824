#!/usr/bin/env python3
"""Benchmark test accuracy against circuit depth on an image-pair task.

Writes the generated sweep spec next to the results so a run can be
reproduced from its output directory alone.

Usage:
    python scripts/run_depth_sweep.py --out runs/depth [--dataset mnist]
        [--depths 1 3 5 10] [--ents cx] [--seeds 10] [--jobs 4]
"""

import argparse
import json
import sys
from pathlib import Path

from qnnsim import cli


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dataset", default="mnist")
    ap.add_argument("--depths", type=int, nargs="+", default=[1, 3, 5, 10])
    ap.add_argument("--ents", nargs="+", default=["cx"],
                    choices=("cz", "cx", "cx2"))
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--iters", type=int, default=100)
    ap.add_argument("--batch", type=int, default=16)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--data-dir", default=None)
    ap.add_argument("--out", default="runs/depth")
    args = ap.parse_args()

    spec = {
        "dataset": args.dataset,
        "encoding": "amplitude",
        "depths": args.depths,
        "ents": args.ents,
        "seeds": args.seeds,
        "iters": args.iters,
        "batch": args.batch,
        "eval_every": 10,
        "out": args.out,
    }
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec_path = out_dir / "sweep.json"
    spec_path.write_text(json.dumps(spec, indent=2) + "\n")

    argv = ["sweep", "--spec", str(spec_path), "--jobs", str(args.jobs)]
    if args.data_dir:
        argv += ["--data-dir", args.data_dir]
    return cli.main(argv)


if __name__ == "__main__":
    sys.exit(main())
