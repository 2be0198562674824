"""Minibatch Adam training loop for circuit classifiers.

Each iteration draws a batch without replacement, computes the batch-mean
loss gradient through the parameter-shift engine (``n_b * (2P + 1)``
hypothesis evaluations, counted in ``RunRecord.grad_evals``), and applies one
Adam update.  Accuracy/loss snapshots of the full train and test sets are
taken at iteration 0, every ``eval_every`` iterations, and at the end; they
are bookkeeping only and are not counted in ``grad_evals``.

Runs are deterministic for a fixed config and datasets: parameter init and
batch selection derive from ``config.seed`` and all reductions run in fixed
sample order.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .data_io import LabeledDataset
from .encoding import AmplitudeEncoding, BlockEncoding, encode_amplitude
from .objective import LOSS_KINDS, Hypothesis, batch_gradient, batch_hypothesis

PARAM_ABORT_LIMIT = 1e6


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one training run."""

    learning_rate: float = 0.005
    batch_size: int = 64
    iterations: int = 200
    eval_every: int = 10
    loss: str = "ce"
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    num_train: int = 500
    num_test: int = 100

    def __post_init__(self):
        # lr = 0 is allowed: it yields a no-op run with flat metric curves.
        if not (np.isfinite(self.learning_rate) and self.learning_rate >= 0):
            raise ValueError("learning_rate must be non-negative and finite")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.eval_every < 1:
            raise ValueError("eval_every must be >= 1")
        if self.loss not in LOSS_KINDS:
            raise ValueError(f"loss must be one of {LOSS_KINDS}")
        if not 0 <= self.beta1 < 1 or not 0 <= self.beta2 < 1:
            raise ValueError("Adam betas must lie in [0, 1)")
        if self.adam_eps <= 0:
            raise ValueError("adam_eps must be positive")


def init_params(num_params: int, seed: int) -> np.ndarray:
    """Initial angles, uniform on [0, 2*pi)."""
    if num_params < 1:
        raise ValueError("num_params must be >= 1")
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 2.0 * np.pi, num_params)


@dataclass
class AdamState:
    """Parameters plus Adam moment estimates after ``step`` updates."""

    params: np.ndarray
    m: np.ndarray
    v: np.ndarray
    step: int = 0


def init_adam(params: np.ndarray) -> AdamState:
    return AdamState(
        params=np.array(params, dtype=np.float64),
        m=np.zeros_like(params, dtype=np.float64),
        v=np.zeros_like(params, dtype=np.float64),
        step=0,
    )


def adam_step(state: AdamState, grad: np.ndarray, config: TrainConfig) -> AdamState:
    """One bias-corrected Adam update; returns a new state."""
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != state.params.shape:
        raise ValueError("gradient shape does not match parameters")
    t = state.step + 1
    m = config.beta1 * state.m + (1.0 - config.beta1) * grad
    v = config.beta2 * state.v + (1.0 - config.beta2) * grad * grad
    m_hat = m / (1.0 - config.beta1**t)
    v_hat = v / (1.0 - config.beta2**t)
    params = state.params - config.learning_rate * m_hat / (
        np.sqrt(v_hat) + config.adam_eps
    )
    return AdamState(params=params, m=m, v=v, step=t)


@dataclass
class RunRecord:
    """Everything one run produced: snapshots, final params, and counters."""

    config: TrainConfig
    meta: dict = field(default_factory=dict)
    eval_iters: list = field(default_factory=list)
    train_acc: list = field(default_factory=list)
    train_loss: list = field(default_factory=list)
    test_acc: list = field(default_factory=list)
    test_loss: list = field(default_factory=list)
    final_params: np.ndarray | None = None
    grad_evals: int = 0
    wall_time: float = 0.0
    aborted: bool = False
    abort_reason: str = ""


def _prepared_inputs(model: Hypothesis, dataset: LabeledDataset):
    """(initial states, block angle base) for a dataset under this model.

    Exactly one of the two is None: state-style inputs fix the initial
    states (angles stay the raw parameters), block encoding fixes the
    initial state to |0...0> and offsets the angles per sample.
    """
    n = model.template.num_qubits
    if dataset.states is not None:
        if dataset.num_qubits != n:
            raise ValueError(
                f"dataset states span {dataset.num_qubits} qubits, model has {n}"
            )
        return np.ascontiguousarray(dataset.states, dtype=np.complex128), None
    enc = model.encoding
    if isinstance(enc, AmplitudeEncoding):
        states = np.empty((len(dataset), 2**n), dtype=np.complex128)
        for i, row in enumerate(dataset.features):
            states[i] = encode_amplitude(row, enc).amplitudes
        return states, None
    if isinstance(enc, BlockEncoding):
        num_params = model.template.num_params
        feats = np.asarray(dataset.features, dtype=np.float64)
        if feats.shape[1] > num_params:
            raise ValueError(
                f"{feats.shape[1]} features exceed {num_params} angle slots"
            )
        base = np.zeros((len(dataset), num_params), dtype=np.float64)
        base[:, : feats.shape[1]] = enc.scale * feats
        return None, base
    raise ValueError("feature datasets need an encoding on the hypothesis")


def _zero_states(n: int, count: int) -> np.ndarray:
    states = np.zeros((count, 2**n), dtype=np.complex128)
    states[:, 0] = 1.0
    return states


def evaluate(
    model: Hypothesis,
    dataset: LabeledDataset,
    params: np.ndarray,
    kind: str = "ce",
    chunk: int = 512,
) -> tuple[float, float]:
    """(accuracy, mean loss) of the model over a whole dataset.

    Prediction is ``argmax(g)``; a ``g0 == g1`` tie resolves to class 0.
    """
    from .objective import _batch_losses  # shared clamp/loss definitions

    params = np.asarray(params, dtype=np.float64)
    states, base = _prepared_inputs(model, dataset)
    labels = dataset.labels
    n = model.template.num_qubits
    m = len(dataset)
    hits = 0
    loss_sum = 0.0
    for lo in range(0, m, chunk):
        hi = min(lo + chunk, m)
        if base is None:
            g = batch_hypothesis(model, states[lo:hi], params)
        else:
            g = batch_hypothesis(
                model, _zero_states(n, hi - lo), base[lo:hi] + params
            )
        pred = np.argmax(g, axis=1)
        truth = np.argmax(labels[lo:hi], axis=1)
        hits += int(np.sum(pred == truth))
        loss_sum += float(np.sum(_batch_losses(labels[lo:hi], g, kind)))
    return hits / m, loss_sum / m


def train(
    model: Hypothesis,
    train_set: LabeledDataset,
    test_set: LabeledDataset,
    config: TrainConfig,
) -> RunRecord:
    """Run minibatch Adam and return the full training record."""
    t_start = time.perf_counter()
    num_params = model.template.num_params
    m = len(train_set)
    if config.batch_size > m:
        raise ValueError(
            f"batch_size {config.batch_size} exceeds training set size {m}"
        )
    states, base = _prepared_inputs(model, train_set)
    n = model.template.num_qubits
    labels = train_set.labels

    adam = init_adam(init_params(num_params, config.seed))
    batch_rng = np.random.default_rng([config.seed, 1])
    record = RunRecord(config=config, meta={"seed": config.seed})

    def snapshot(it: int):
        tr_acc, tr_loss = evaluate(model, train_set, adam.params, config.loss)
        te_acc, te_loss = evaluate(model, test_set, adam.params, config.loss)
        record.eval_iters.append(it)
        record.train_acc.append(tr_acc)
        record.train_loss.append(tr_loss)
        record.test_acc.append(te_acc)
        record.test_loss.append(te_loss)

    snapshot(0)
    for it in range(1, config.iterations + 1):
        idx = batch_rng.choice(m, size=config.batch_size, replace=False)
        if base is None:
            bg = batch_gradient(
                model, states[idx], adam.params, labels[idx], config.loss
            )
        else:
            bg = batch_gradient(
                model,
                _zero_states(n, config.batch_size),
                base[idx] + adam.params,
                labels[idx],
                config.loss,
            )
        record.grad_evals += bg.evals
        if not (
            np.all(np.isfinite(bg.grad)) and np.all(np.isfinite(bg.losses))
        ):
            record.aborted = True
            record.abort_reason = f"non-finite loss/gradient at iteration {it}"
            break
        adam = adam_step(adam, bg.grad, config)
        if np.max(np.abs(adam.params)) > PARAM_ABORT_LIMIT:
            record.aborted = True
            record.abort_reason = f"parameter blow-up at iteration {it}"
            break
        if it % config.eval_every == 0 or it == config.iterations:
            snapshot(it)

    record.final_params = adam.params
    record.wall_time = time.perf_counter() - t_start
    return record
