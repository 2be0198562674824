"""Benchmark command line: dataset generation, training runs, sweeps.

Subcommands: ``gen-spt`` (exact-diagonalization dataset generation),
``train`` (one training run), ``sweep`` (a grid of runs from a JSON spec),
``grad-check`` (parameter-shift gradients vs. finite differences).

Image datasets are read from ``--data-dir``, the ``QNN_DATA_DIR``
environment variable, or ``./data``, as IDX file pairs under
``<dir>/<name>/images-idx3-ubyte[.gz]``.  Spin-model datasets are generated
on first use and cached under ``<dir>/spt/``.

Every run is deterministic in its seed: the same invocation writes
byte-identical ``runs.csv`` files.  Sweep cells use seeds
``seed_base + cell_index * 10007 + rep`` so cells never share a stream.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import circuits, data_io, spin_models
from .encoding import AmplitudeEncoding, BlockEncoding
from .objective import Hypothesis
from .trainer import RunRecord, TrainConfig, evaluate, train

IMAGE_DATASETS = {
    # dataset name -> (class pair, subdirectory)
    "mnist": ((1, 9), "mnist"),
    "fashion": ((0, 9), "fashion"),
}

_SPT_RE = re.compile(r"^spt(\d+)$")

_idx_cache: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}
_spt_cache: dict[str, data_io.LabeledDataset] = {}


def _positive_int(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return val


def _positive_float(text: str) -> float:
    val = float(text)
    if not (math.isfinite(val) and val > 0):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return val


def resolve_data_dir(explicit: str | None) -> Path:
    if explicit:
        return Path(explicit)
    env = os.environ.get("QNN_DATA_DIR")
    return Path(env) if env else Path("data")


def _find_idx_pair(folder: Path) -> tuple[Path, Path]:
    for img_name in ("images-idx3-ubyte", "train-images-idx3-ubyte"):
        lab_name = img_name.replace("images-idx3", "labels-idx1")
        for suffix in (".gz", ""):
            img = folder / (img_name + suffix)
            lab = folder / (lab_name + suffix)
            if img.exists() and lab.exists():
                return img, lab
    raise FileNotFoundError(
        f"no IDX image/label pair under {folder} "
        "(expected images-idx3-ubyte[.gz] + labels-idx1-ubyte[.gz])"
    )


def load_image_pool(name: str, data_dir: Path):
    """Raw (images, labels) arrays for a named image dataset, cached."""
    classes, sub = IMAGE_DATASETS[name]
    img_path, lab_path = _find_idx_pair(data_dir / sub)
    key = (str(img_path), str(lab_path))
    if key not in _idx_cache:
        _idx_cache[key] = data_io.load_idx_images(img_path, lab_path)
    return _idx_cache[key], classes


def spt_dataset(num_sites: int, step: float, data_dir: Path):
    """Cluster-Ising dataset from the cache directory, generating if absent."""
    path = data_dir / "spt" / f"spt{num_sites}_step{step}.qnnspt"
    key = str(path)
    if key in _spt_cache:
        return _spt_cache[key]
    if path.exists():
        ds = data_io.load_spt_dataset(path)
    else:
        ds = spin_models.make_spt_dataset(num_sites, step=step)
        data_io.save_spt_dataset(path, ds)
    _spt_cache[key] = ds
    return ds


def _split_states(ds, num_train: int, num_test: int, seed: int):
    total = num_train + num_test
    if len(ds) < total:
        raise ValueError(
            f"need {total} samples, dataset has {len(ds)}"
        )
    order = np.random.default_rng(seed).permutation(len(ds))
    return ds.subset(order[:num_train]), ds.subset(order[num_train:total])


def prepare_run_data(params: dict):
    """(train_set, test_set, num_qubits, feature_dim) for one run spec."""
    name = params["dataset"]
    data_dir = Path(params["data_dir"])
    num_train = params["num_train"]
    num_test = params["num_test"]
    seed = params["seed"]
    m = _SPT_RE.match(name)
    if m:
        n = int(m.group(1))
        ds = spt_dataset(n, params.get("spt_step", 0.001), data_dir)
        train_set, test_set = _split_states(ds, num_train, num_test, seed)
        return train_set, test_set, n, None
    if name not in IMAGE_DATASETS:
        raise ValueError(
            f"unknown dataset {name!r}; pick one of "
            f"{sorted(IMAGE_DATASETS)} or sptN (N = 3..12)"
        )
    (images, labels), classes = load_image_pool(name, data_dir)
    train_set, test_set = data_io.preprocess_images(
        images,
        labels,
        classes,
        num_train=num_train,
        num_test=num_test,
        seed=seed,
    )
    dim = train_set.features.shape[1]
    if params["encoding"] == "amplitude":
        n = params.get("qubits") or max(1, math.ceil(math.log2(dim)))
        if 2**n < dim:
            raise ValueError(f"{dim} features do not fit in {n} qubits")
    else:
        n = params.get("qubits") or 10
    return train_set, test_set, n, dim


def build_model(params: dict, num_qubits: int, feature_dim: int | None) -> Hypothesis:
    ent = params["ent"]
    if ent == "analog":
        h = spin_models.aubry_andre(num_qubits, g=1.0, v=0.0, phi=0.0)
        ent = circuits.analog_layer(h, params["t_evo"])
    template = circuits.build_classifier(num_qubits, params["depth"], ent)
    if params["encoding"] == "block":
        if feature_dim is None:
            raise ValueError("block encoding needs feature inputs, not states")
        if feature_dim > template.num_params:
            raise ValueError(
                f"{feature_dim} features need at least {feature_dim} angle "
                f"slots; depth {params['depth']} on {num_qubits} qubits has "
                f"{template.num_params}"
            )
        enc = BlockEncoding(scale=params["scale"], pad_to=template.num_params)
    elif feature_dim is not None:
        enc = AmplitudeEncoding(num_qubits=num_qubits)
    else:
        enc = None
    return Hypothesis(
        template=template,
        measure_qubit=params.get("measure_qubit") or 0,
        encoding=enc,
    )


def run_one(params: dict) -> RunRecord:
    """Execute one training run described by a plain dict (picklable)."""
    train_set, test_set, n, feature_dim = prepare_run_data(params)
    model = build_model(params, n, feature_dim)
    config = TrainConfig(
        learning_rate=params["lr"],
        batch_size=params["batch"],
        iterations=params["iters"],
        eval_every=params["eval_every"],
        loss=params["loss"],
        seed=params["seed"],
        num_train=params["num_train"],
        num_test=params["num_test"],
    )
    record = train(model, train_set, test_set, config)
    record.meta.update(
        {
            "dataset": params["dataset"],
            "encoding": params["encoding"],
            "ent_kind": params["ent"],
            "depth": params["depth"],
            "scale": params["scale"] if params["encoding"] == "block" else None,
            "t_evo": params["t_evo"] if params["ent"] == "analog" else None,
            "seed": params["seed"],
        }
    )
    return record


def _base_params(args, dataset: str) -> dict:
    return {
        "dataset": dataset,
        "data_dir": str(resolve_data_dir(args.data_dir)),
        "encoding": args.encoding,
        "depth": getattr(args, "depth", 1),
        "ent": getattr(args, "ent", "cx"),
        "scale": getattr(args, "scale", 2.0),
        "t_evo": getattr(args, "t_evo", None),
        "seed": getattr(args, "seed", 0),
        "lr": args.lr,
        "batch": args.batch,
        "iters": args.iters,
        "eval_every": args.eval_every,
        "loss": args.loss,
        "num_train": args.num_train,
        "num_test": args.num_test,
        "qubits": getattr(args, "qubits", None),
        "measure_qubit": getattr(args, "measure_qubit", None),
        "spt_step": getattr(args, "spt_step", 0.001),
    }


def _add_train_flags(sub, with_axes: bool = True):
    sub.add_argument("--data-dir", help="dataset directory (default: $QNN_DATA_DIR or ./data)")
    sub.add_argument("--lr", type=_positive_float, default=0.005)
    sub.add_argument("--batch", type=_positive_int, default=64)
    sub.add_argument("--iters", type=_positive_int, default=200)
    sub.add_argument("--eval-every", type=_positive_int, default=10)
    sub.add_argument("--loss", choices=("ce", "mse"), default="ce")
    sub.add_argument("--num-train", type=_positive_int, default=500)
    sub.add_argument("--num-test", type=_positive_int, default=100)
    sub.add_argument("--out", default="runs", help="output directory")


def cmd_gen_spt(args) -> int:
    data_dir = resolve_data_dir(args.data_dir)
    out = (
        Path(args.out)
        if args.out
        else data_dir / "spt" / f"spt{args.qubits}_step{args.step}.qnnspt"
    )
    ds = spin_models.make_spt_dataset(
        args.qubits, start=args.start, stop=args.stop, step=args.step
    )
    data_io.save_spt_dataset(out, ds)
    gaps = np.asarray(ds.meta["gaps"], dtype=np.float64)
    print(f"wrote {len(ds)} ground states to {out}")
    print(
        f"gap: min={gaps.min():.6f} mean={gaps.mean():.6f} "
        f"max={gaps.max():.6f}"
    )
    return 0


def cmd_train(args, parser) -> int:
    if args.encoding == "amplitude" and args.scale is not None:
        print(
            "warning: --scale is ignored with amplitude encoding",
            file=sys.stderr,
        )
        args.scale = None
    if args.encoding == "block" and args.scale is None:
        args.scale = 2.0
    if args.ent == "analog" and args.t_evo is None:
        parser.error("--ent analog requires --t-evo")
    if args.ent != "analog" and args.t_evo is not None:
        parser.error("--t-evo only applies with --ent analog")
    record = run_one(_base_params(args, args.dataset))
    paths = data_io.emit_results(
        [record], axes=[], out_dir=args.out, table_name="train"
    )
    if record.aborted:
        print(f"run aborted: {record.abort_reason}", file=sys.stderr)
        return 1
    print(
        f"dataset={args.dataset} depth={args.depth} ent={args.ent} "
        f"seed={args.seed}: final train_acc={record.train_acc[-1]:.4f} "
        f"test_acc={record.test_acc[-1]:.4f} "
        f"({record.grad_evals} hypothesis evaluations, "
        f"{record.wall_time:.1f}s)"
    )
    print(f"wrote {paths['runs']}")
    return 0


def _sweep_cells(spec: dict, parser):
    """Axis list + per-run param dicts for a sweep spec."""
    axes = []
    for key, field in (
        ("depths", "depth"),
        ("ents", "ent_kind"),
        ("scales", "scale"),
        ("t_evos", "t_evo"),
    ):
        if key in spec:
            vals = spec[key]
            if not isinstance(vals, list) or not vals:
                parser.error(f"sweep axis {key!r} must be a non-empty list")
            axes.append((field, vals))
    if not axes:
        parser.error("sweep spec needs at least one axis (depths/ents/scales/t_evos)")
    seeds = int(spec.get("seeds", 1))
    if seeds < 1:
        parser.error("sweep seeds must be >= 1")
    return axes, seeds


def cmd_sweep(args, parser) -> int:
    spec = json.loads(Path(args.spec).read_text())
    if args.seeds is not None:
        spec["seeds"] = args.seeds
    axes, seeds = _sweep_cells(spec, parser)
    dataset = spec.get("dataset")
    if not dataset:
        parser.error("sweep spec needs a 'dataset'")
    seed_base = int(spec.get("seed_base", 0))
    encoding = spec.get("encoding", "amplitude")
    defaults = {
        "data_dir": str(resolve_data_dir(args.data_dir or spec.get("data_dir"))),
        "encoding": encoding,
        "depth": int(spec.get("depth", 1)),
        "ent": spec.get("ent", "cx"),
        "scale": spec.get("scale", 2.0) if encoding == "block" else None,
        "t_evo": spec.get("t_evo"),
        "lr": float(spec.get("lr", 0.005)),
        "batch": int(spec.get("batch", 64)),
        "iters": int(spec.get("iters", 200)),
        "eval_every": int(spec.get("eval_every", 10)),
        "loss": spec.get("loss", "ce"),
        "num_train": int(spec.get("num_train", 500)),
        "num_test": int(spec.get("num_test", 100)),
        "qubits": spec.get("qubits"),
        "measure_qubit": spec.get("measure_qubit"),
        "spt_step": float(spec.get("spt_step", 0.001)),
        "dataset": dataset,
    }
    axis_fields = [name for name, _ in axes]
    cell_values = list(itertools.product(*(vals for _, vals in axes)))
    jobs = []
    for cell_index, combo in enumerate(cell_values):
        for rep in range(seeds):
            params = dict(defaults)
            for field, value in zip(axis_fields, combo):
                params["ent" if field == "ent_kind" else field] = value
            params["seed"] = seed_base + cell_index * 10007 + rep
            if params["ent"] == "analog" and params["t_evo"] is None:
                parser.error("analog cells need a t_evos axis or a t_evo default")
            jobs.append(params)

    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            records = list(pool.map(run_one, jobs))
    else:
        records = [run_one(p) for p in jobs]

    out_dir = args.out or spec.get("out", "runs")
    paths = data_io.emit_results(records, axes, out_dir)
    failed = sum(r.aborted for r in records)
    print(
        f"{len(records)} runs over {len(cell_values)} cells "
        f"({failed} aborted); wrote {paths['runs']} and {paths['summary']}"
    )
    return 1 if failed else 0


def cmd_grad_check(args) -> int:
    from .objective import fd_gradient_oracle, loss_gradient

    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for trial in range(args.trials):
        n = args.qubits if args.qubits else int(rng.integers(2, 7))
        depth = args.depth if args.depth else int(rng.integers(1, 5))
        ent_name = ("cz", "cx", "cx2", "analog")[int(rng.integers(4))]
        kind = ("ce", "mse")[int(rng.integers(2))]
        if ent_name == "analog" and n < 2:
            ent_name = "cz"
        if ent_name == "analog":
            h = spin_models.aubry_andre(n, 1.0, 0.0, 0.0)
            ent = circuits.analog_layer(h, float(rng.uniform(0.1, 2.0)))
        else:
            ent = ent_name
        template = circuits.build_classifier(n, depth, ent)
        theta = rng.uniform(0.0, 2.0 * np.pi, template.num_params)
        label = np.zeros(2)
        label[int(rng.integers(2))] = 1.0
        if rng.integers(2):
            dim = int(rng.integers(2, 2**n + 1))
            x = rng.normal(size=dim)
            model = Hypothesis(
                template, encoding=AmplitudeEncoding(num_qubits=n)
            )
        else:
            dim = int(rng.integers(2, template.num_params + 1))
            x = rng.normal(size=dim)
            model = Hypothesis(
                template,
                encoding=BlockEncoding(
                    scale=float(rng.uniform(0.5, 3.0)),
                    pad_to=template.num_params,
                ),
            )
        got = loss_gradient(model, x, label, theta, kind)
        want = fd_gradient_oracle(model, x, label, theta, kind, delta=args.delta)
        err = float(np.abs(got - want).max())
        worst = max(worst, err)
        if err > args.tol:
            print(
                f"trial {trial}: deviation {err:.3e} exceeds {args.tol:.1e} "
                f"(n={n} depth={depth} ent={ent_name} loss={kind})",
                file=sys.stderr,
            )
            return 1
    print(
        f"{args.trials} random configurations: parameter-shift vs central "
        f"differences, worst deviation {worst:.3e} (tolerance {args.tol:.1e})"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qnn-bench",
        description="Train and benchmark variational quantum classifiers.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_gen = subs.add_parser("gen-spt", help="generate a cluster-Ising dataset")
    p_gen.add_argument("--qubits", type=_positive_int, required=True)
    p_gen.add_argument("--start", type=float, default=0.0)
    p_gen.add_argument("--stop", type=float, default=2.0)
    p_gen.add_argument("--step", type=_positive_float, default=0.001)
    p_gen.add_argument("--out", help="output .qnnspt path")
    p_gen.add_argument("--data-dir")

    p_train = subs.add_parser("train", help="run one training configuration")
    p_train.add_argument("--dataset", required=True)
    p_train.add_argument(
        "--encoding", choices=("amplitude", "block"), default="amplitude"
    )
    p_train.add_argument("--depth", type=_positive_int, required=True)
    p_train.add_argument(
        "--ent", choices=("cz", "cx", "cx2", "analog"), default="cx"
    )
    p_train.add_argument("--t-evo", type=float, default=None)
    p_train.add_argument("--scale", type=float, default=None)
    p_train.add_argument("--qubits", type=_positive_int, default=None)
    p_train.add_argument("--measure-qubit", type=_positive_int, default=None)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--spt-step", type=_positive_float, default=0.001)
    _add_train_flags(p_train)

    p_sweep = subs.add_parser("sweep", help="run a grid of configurations")
    p_sweep.add_argument("--spec", required=True, help="sweep JSON path")
    p_sweep.add_argument("--out")
    p_sweep.add_argument("--jobs", type=_positive_int, default=1)
    p_sweep.add_argument("--seeds", type=_positive_int, default=None)
    p_sweep.add_argument("--data-dir")

    p_grad = subs.add_parser(
        "grad-check", help="verify gradients against finite differences"
    )
    p_grad.add_argument("--trials", type=_positive_int, default=100)
    p_grad.add_argument(
        "--qubits", type=_positive_int, default=None,
        help="fix the qubit count (default: randomized per trial)",
    )
    p_grad.add_argument(
        "--depth", type=_positive_int, default=None,
        help="fix the circuit depth (default: randomized per trial)",
    )
    p_grad.add_argument("--seed", type=int, default=0)
    p_grad.add_argument("--tol", type=_positive_float, default=1e-6)
    p_grad.add_argument("--delta", type=_positive_float, default=1e-5)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen-spt":
            return cmd_gen_spt(args)
        if args.command == "train":
            return cmd_train(args, parser)
        if args.command == "sweep":
            return cmd_sweep(args, parser)
        if args.command == "grad-check":
            return cmd_grad_check(args)
        parser.error(f"unknown command {args.command!r}")
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
