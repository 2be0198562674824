#!/usr/bin/env python3
"""Benchmark analog entangling layers against their evolution time.

Short evolution times barely entangle the register and should underperform
times of order one.

Usage:
    python scripts/run_analog_sweep.py --out runs/analog [--dataset mnist]
        [--t-evos 0.1 0.5 1.0 2.0] [--seeds 10] [--jobs 4]
"""

import argparse
import json
import sys
from pathlib import Path

from qnnsim import cli


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dataset", default="mnist")
    ap.add_argument("--t-evos", type=float, nargs="+",
                    default=[0.1, 0.5, 1.0, 2.0])
    ap.add_argument("--depth", type=int, default=1)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--iters", type=int, default=150)
    ap.add_argument("--batch", type=int, default=8)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--data-dir", default=None)
    ap.add_argument("--out", default="runs/analog")
    args = ap.parse_args()

    spec = {
        "dataset": args.dataset,
        "encoding": "amplitude",
        "depth": args.depth,
        "ent": "analog",
        "t_evos": args.t_evos,
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
