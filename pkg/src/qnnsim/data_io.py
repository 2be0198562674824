"""Dataset ingestion, preprocessing, serialization, and result tables.

Image data arrives in the IDX format (big-endian magic + dims header, then
raw bytes; ``.gz`` paths are decompressed transparently).  Spin-model
datasets round-trip through a small self-describing container:

    QNNSPT1                      <- magic line
    num_qubits 8
    count 2000
    grid 0.0 2.0 0.001           <- lambda start/stop/step
    lambdas <space-separated floats>
    gaps <space-separated floats>
    end
    <count * 2**num_qubits complex128 amplitudes, little-endian float64
     pairs (re, im), sample-major>

Labels are reconstructed from the lambdas on load: (1,0) below the critical
coupling 1, (0,1) above it.

Result emission writes one long-form ``runs.csv`` (a row per evaluation
snapshot per run) plus a ``summary_*.csv`` aggregating final test accuracy
over seeds per parameter cell.  Float formatting uses ``repr`` so equal runs
produce byte-identical files.
"""

from __future__ import annotations

import csv
import gzip
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass
class LabeledDataset:
    """Samples with one-hot pair labels.

    Exactly one of ``features`` (real ``(m, d)``) or ``states`` (complex
    ``(m, 2**num_qubits)``) is set.  ``meta`` carries provenance; entries that
    are per-sample arrays are sliced along with the data by :meth:`subset`.
    """

    features: np.ndarray | None
    states: np.ndarray | None
    labels: np.ndarray
    num_qubits: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.features is None) == (self.states is None):
            raise ValueError("exactly one of features/states must be given")
        self.labels = np.asarray(self.labels, dtype=np.float64)
        if self.labels.ndim != 2 or self.labels.shape[1] != 2:
            raise ValueError("labels must have shape (m, 2)")
        ok = np.all(
            ((self.labels == 0.0) | (self.labels == 1.0))
        ) and np.all(self.labels.sum(axis=1) == 1.0)
        if not ok:
            raise ValueError("labels must be one-hot rows (1,0) or (0,1)")
        m = self.labels.shape[0]
        if self.features is not None:
            self.features = np.asarray(self.features, dtype=np.float64)
            if self.features.ndim != 2 or self.features.shape[0] != m:
                raise ValueError("features must have shape (m, d)")
        else:
            if self.num_qubits is None:
                raise ValueError("state datasets must declare num_qubits")
            self.states = np.asarray(self.states, dtype=np.complex128)
            if self.states.shape != (m, 2**self.num_qubits):
                raise ValueError(
                    f"states must have shape ({m}, {2**self.num_qubits})"
                )

    def __len__(self) -> int:
        return self.labels.shape[0]

    def subset(self, idx) -> "LabeledDataset":
        """Select samples by index array, slicing per-sample meta arrays."""
        idx = np.asarray(idx)
        m = len(self)
        meta = {}
        for key, val in self.meta.items():
            if isinstance(val, np.ndarray) and val.ndim >= 1 and len(val) == m:
                meta[key] = val[idx]
            else:
                meta[key] = val
        return LabeledDataset(
            features=None if self.features is None else self.features[idx],
            states=None if self.states is None else self.states[idx],
            labels=self.labels[idx],
            num_qubits=self.num_qubits,
            meta=meta,
        )


def _read_bytes(path: Path) -> bytes:
    if path.suffix == ".gz":
        with gzip.open(path, "rb") as fh:
            return fh.read()
    return path.read_bytes()


def load_idx_images(images_path, labels_path) -> tuple[np.ndarray, np.ndarray]:
    """Read an IDX image/label file pair.

    Returns ``(images, labels)`` with ``images`` uint8 ``(m, rows, cols)``
    and ``labels`` uint8 ``(m,)``.  Raises ``ValueError`` on a wrong magic
    number, truncated payload, or image/label count mismatch.
    """
    images_path = Path(images_path)
    labels_path = Path(labels_path)
    raw = _read_bytes(images_path)
    if len(raw) < 16:
        raise ValueError(f"{images_path}: truncated IDX header")
    magic, count, rows, cols = struct.unpack(">IIII", raw[:16])
    if magic != IDX_IMAGES_MAGIC:
        raise ValueError(
            f"{images_path}: bad magic 0x{magic:08x}, "
            f"expected 0x{IDX_IMAGES_MAGIC:08x}"
        )
    need = 16 + count * rows * cols
    if len(raw) != need:
        raise ValueError(
            f"{images_path}: expected {need} bytes, found {len(raw)}"
        )
    images = np.frombuffer(raw, dtype=np.uint8, offset=16).reshape(
        count, rows, cols
    )

    raw = _read_bytes(labels_path)
    if len(raw) < 8:
        raise ValueError(f"{labels_path}: truncated IDX header")
    magic, lcount = struct.unpack(">II", raw[:8])
    if magic != IDX_LABELS_MAGIC:
        raise ValueError(
            f"{labels_path}: bad magic 0x{magic:08x}, "
            f"expected 0x{IDX_LABELS_MAGIC:08x}"
        )
    if len(raw) != 8 + lcount:
        raise ValueError(
            f"{labels_path}: expected {8 + lcount} bytes, found {len(raw)}"
        )
    labels = np.frombuffer(raw, dtype=np.uint8, offset=8)
    if lcount != count:
        raise ValueError(
            f"image/label count mismatch: {count} images, {lcount} labels"
        )
    return images.copy(), labels.copy()


def resize_weights(src: int, dst: int) -> np.ndarray:
    """(dst, src) area-overlap averaging weights for one image axis.

    Output cell ``i`` covers the source interval
    ``[i * src/dst, (i+1) * src/dst)``; each source pixel contributes its
    overlap fraction, so rows sum to 1 and constants stay constant.
    """
    if dst < 1 or src < dst:
        raise ValueError("need src >= dst >= 1")
    ratio = src / dst
    w = np.zeros((dst, src), dtype=np.float64)
    for i in range(dst):
        lo = i * ratio
        hi = (i + 1) * ratio
        for j in range(int(np.floor(lo)), int(np.ceil(hi))):
            overlap = min(hi, j + 1) - max(lo, j)
            if overlap > 0:
                w[i, j] = overlap / ratio
    return w


def downsample_images(images: np.ndarray, size: int = 16) -> np.ndarray:
    """Area-average square images down to ``(m, size * size)`` float64.

    Input is ``(m, r, c)`` with ``r == c`` (uint8 counts are scaled by 1/255
    first); 28x28 inputs become the 256-feature vectors the 8- and 10-qubit
    classifiers consume.
    """
    images = np.asarray(images)
    if images.ndim != 3 or images.shape[1] != images.shape[2]:
        raise ValueError("expected (m, r, r) square images")
    x = images.astype(np.float64)
    if images.dtype == np.uint8:
        x = x / 255.0
    w = resize_weights(images.shape[1], size)
    out = np.einsum("ir,mrc,jc->mij", w, x, w)
    return out.reshape(images.shape[0], size * size)


def preprocess_images(
    images: np.ndarray,
    labels: np.ndarray,
    classes: tuple[int, int],
    num_train: int = 500,
    num_test: int = 100,
    seed: int = 0,
    size: int = 16,
    normalize: bool = True,
    standardize: bool = False,
) -> tuple[LabeledDataset, LabeledDataset]:
    """Filter two classes, downsample, normalize, shuffle, split.

    ``classes[0]`` maps to label ``(1, 0)`` and ``classes[1]`` to ``(0, 1)``.
    The pooled filtered samples are shuffled with ``seed`` and the first
    ``num_train`` / next ``num_test`` become the train / test sets.
    ``standardize`` applies a pooled per-feature z-score before the (default)
    per-sample L2 normalization; it exists to demonstrate sign-indefinite
    features and is off by default.
    """
    if classes[0] == classes[1]:
        raise ValueError("the two classes must differ")
    labels = np.asarray(labels)
    mask = (labels == classes[0]) | (labels == classes[1])
    picked = np.asarray(images)[mask]
    plabels = labels[mask]
    total = num_train + num_test
    if picked.shape[0] < total:
        raise ValueError(
            f"need {total} samples of classes {classes}, found {picked.shape[0]}"
        )
    feats = downsample_images(picked, size=size)
    if standardize:
        mu = feats.mean(axis=0)
        sd = feats.std(axis=0)
        sd[sd == 0.0] = 1.0
        feats = (feats - mu) / sd
    if normalize:
        norms = np.linalg.norm(feats, axis=1)
        if np.any(norms == 0.0):
            raise ValueError("cannot L2-normalize an all-zero sample")
        feats = feats / norms[:, None]
    onehot = np.zeros((feats.shape[0], 2), dtype=np.float64)
    onehot[plabels == classes[0], 0] = 1.0
    onehot[plabels == classes[1], 1] = 1.0

    order = np.random.default_rng(seed).permutation(feats.shape[0])
    tr = order[:num_train]
    te = order[num_train:total]
    meta = {
        "classes": classes,
        "seed": seed,
        "pool_size": int(feats.shape[0]),
        "normalize": normalize,
        "standardize": standardize,
    }
    make = lambda idx: LabeledDataset(
        features=feats[idx], states=None, labels=onehot[idx], meta=dict(meta)
    )
    return make(tr), make(te)


SPT_MAGIC = "QNNSPT1"


def _format_floats(vals) -> str:
    return " ".join(repr(float(v)) for v in vals)


def save_spt_dataset(path, dataset: LabeledDataset) -> None:
    """Write a spin-model state dataset in the QNNSPT1 container."""
    if dataset.states is None:
        raise ValueError("only state datasets can be saved as QNNSPT1")
    meta = dataset.meta
    if "lambdas" not in meta or "gaps" not in meta:
        raise ValueError("dataset meta must carry 'lambdas' and 'gaps'")
    lambdas = np.asarray(meta["lambdas"], dtype=np.float64)
    gaps = np.asarray(meta["gaps"], dtype=np.float64)
    m = len(dataset)
    if lambdas.shape != (m,) or gaps.shape != (m,):
        raise ValueError("lambdas/gaps must have one entry per sample")
    start, stop, step = meta.get("grid", (float("nan"),) * 3)
    header = (
        f"{SPT_MAGIC}\n"
        f"num_qubits {dataset.num_qubits}\n"
        f"count {m}\n"
        f"grid {_format_floats((start, stop, step))}\n"
        f"lambdas {_format_floats(lambdas)}\n"
        f"gaps {_format_floats(gaps)}\n"
        f"end\n"
    )
    flat = np.empty(m * 2 ** dataset.num_qubits * 2, dtype="<f8")
    flat[0::2] = dataset.states.real.reshape(-1)
    flat[1::2] = dataset.states.imag.reshape(-1)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(flat.tobytes())


def spt_labels_from_lambdas(lambdas: np.ndarray) -> np.ndarray:
    """One-hot labels from couplings: (1,0) below 1, (0,1) above."""
    lambdas = np.asarray(lambdas, dtype=np.float64)
    labels = np.zeros((lambdas.size, 2), dtype=np.float64)
    labels[lambdas < 1.0, 0] = 1.0
    labels[lambdas > 1.0, 1] = 1.0
    return labels


def load_spt_dataset(path) -> LabeledDataset:
    """Read a QNNSPT1 container back into a LabeledDataset."""
    path = Path(path)
    raw = path.read_bytes()
    end_marker = b"\nend\n"
    cut = raw.find(end_marker)
    if cut < 0 or not raw.startswith(SPT_MAGIC.encode("ascii") + b"\n"):
        raise ValueError(f"{path}: not a {SPT_MAGIC} file")
    header = raw[:cut].decode("ascii").splitlines()
    fields = {}
    for line in header[1:]:
        key, _, val = line.partition(" ")
        fields[key] = val
    try:
        n = int(fields["num_qubits"])
        count = int(fields["count"])
        grid = tuple(float(v) for v in fields["grid"].split())
        lambdas = np.array([float(v) for v in fields["lambdas"].split()])
        gaps = np.array([float(v) for v in fields["gaps"].split()])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{path}: malformed {SPT_MAGIC} header") from exc
    if not 1 <= n <= 14:
        raise ValueError(f"{path}: num_qubits {n} out of range")
    if lambdas.shape != (count,) or gaps.shape != (count,):
        raise ValueError(f"{path}: lambdas/gaps length does not match count")
    body = raw[cut + len(end_marker):]
    need = count * 2**n * 16
    if len(body) != need:
        raise ValueError(
            f"{path}: expected {need} amplitude bytes, found {len(body)}"
        )
    flat = np.frombuffer(body, dtype="<f8")
    states = (flat[0::2] + 1j * flat[1::2]).reshape(count, 2**n)
    if np.any(np.abs(lambdas - 1.0) < 1e-9):
        raise ValueError(f"{path}: contains the critical coupling lambda=1")
    return LabeledDataset(
        features=None,
        states=states,
        labels=spt_labels_from_lambdas(lambdas),
        num_qubits=n,
        meta={
            "name": f"spt{n}",
            "model": "cluster_ising",
            "num_sites": n,
            "grid": grid,
            "lambdas": lambdas,
            "gaps": gaps,
            "source": str(path),
        },
    )


RUN_CSV_COLUMNS = [
    "dataset",
    "encoding",
    "ent_kind",
    "depth",
    "scale",
    "t_evo",
    "seed",
    "iter",
    "train_acc",
    "train_loss",
    "test_acc",
    "test_loss",
]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_results(records, axes, out_dir, table_name: str | None = None) -> dict:
    """Write ``runs.csv`` plus one summary table; returns the paths.

    ``records`` are :class:`~qnnsim.trainer.RunRecord` objects whose ``meta``
    echoes the axis values (``dataset``, ``encoding``, ``ent_kind``,
    ``depth``, ``scale``, ``t_evo``, ``seed``).  ``axes`` is an ordered list
    of ``(name, values)`` pairs; the summary has one row per value
    combination aggregating final test accuracy over the records that landed
    in that cell.  Cells with failures or no runs stay visible: aborted runs
    are excluded from the means but counted in ``failed``, and empty cells
    emit blank statistics rather than disappearing.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    runs_path = out_dir / "runs.csv"
    with open(runs_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RUN_CSV_COLUMNS)
        for rec in records:
            meta = rec.meta
            fixed = [
                _cell(meta.get("dataset")),
                _cell(meta.get("encoding")),
                _cell(meta.get("ent_kind")),
                _cell(meta.get("depth")),
                _cell(meta.get("scale")),
                _cell(meta.get("t_evo")),
                _cell(meta.get("seed", rec.config.seed)),
            ]
            for i, it in enumerate(rec.eval_iters):
                writer.writerow(
                    fixed
                    + [
                        _cell(it),
                        _cell(rec.train_acc[i]),
                        _cell(rec.train_loss[i]),
                        _cell(rec.test_acc[i]),
                        _cell(rec.test_loss[i]),
                    ]
                )

    axis_names = [name for name, _ in axes]
    if table_name is None:
        table_name = "_x_".join(axis_names) if axis_names else "all"
    summary_path = out_dir / f"summary_{table_name}.csv"

    def key_of(meta):
        return tuple(meta.get(name) for name in axis_names)

    cells: dict[tuple, list] = {}
    for rec in records:
        cells.setdefault(key_of(rec.meta), []).append(rec)

    import itertools

    combos = list(itertools.product(*(vals for _, vals in axes))) or [()]
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            axis_names
            + [
                "n_runs",
                "failed",
                "seeds",
                "mean_final_test_acc",
                "std_final_test_acc",
                "mean_final_test_loss",
            ]
        )
        for combo in combos:
            recs = cells.get(tuple(combo), [])
            ok = [r for r in recs if not r.aborted]
            seeds = ";".join(
                str(r.meta.get("seed", r.config.seed)) for r in ok
            )
            accs = np.array([r.test_acc[-1] for r in ok], dtype=np.float64)
            losses = np.array([r.test_loss[-1] for r in ok], dtype=np.float64)
            if accs.size:
                stats = [
                    repr(float(accs.mean())),
                    repr(float(accs.std())),
                    repr(float(losses.mean())),
                ]
            else:
                stats = ["", "", ""]
            writer.writerow(
                [_cell(v) for v in combo]
                + [str(len(recs)), str(len(recs) - len(ok)), seeds]
                + stats
            )
    return {"runs": runs_path, "summary": summary_path}
