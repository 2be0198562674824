"""Hypothesis evaluation, losses, and parameter-shift gradients.

The hypothesis of a classifier is the projector-probability pair
``g = (P(|0>), P(|1>))`` of one measured qubit after the circuit runs on the
encoded input.  Losses compare ``g`` against a one-hot label ``a``:

* mean squared error  ``L = sum_k (a_k - g_k)^2``
* cross entropy       ``L = -sum_k a_k * log(g_k)`` with ``g_k`` clamped to
  at least ``EPSILON_CLIP`` inside the log.

Gradients flow through the chain rule ``dL/dtheta = sum_k (dL/dg_k) *
(dg_k/dtheta)`` where every ``dg_k/dtheta`` comes from the exact
parameter-shift rule ``(h(+pi/2) - h(-pi/2)) / 2``.  The per-sample cost is
``2 * num_params + 1`` hypothesis evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from . import circuits, statevector as sv
from .encoding import (
    AmplitudeEncoding,
    BlockEncoding,
    encode_amplitude,
    encode_block,
)
from .engine import compile_template
from .statevector import StateVector

EPSILON_CLIP = 1e-10

LOSS_KINDS = ("ce", "mse")


@dataclass(frozen=True)
class Hypothesis:
    """Circuit template + measured qubit + input encoding.

    The measured observable pair is ``(Projector0(q), Projector1(q))`` on
    ``measure_qubit`` (1-based; defaults to the middle qubit ``ceil(n/2)``).
    ``encoding`` may be None when inputs are already statevectors.
    """

    template: circuits.CircuitTemplate
    measure_qubit: int = 0  # 0 means "middle qubit", resolved in post-init
    encoding: AmplitudeEncoding | BlockEncoding | None = None

    def __post_init__(self):
        n = self.template.num_qubits
        q = self.measure_qubit
        if q == 0:
            object.__setattr__(self, "measure_qubit", ceil(n / 2))
        elif not 1 <= q <= n:
            raise ValueError(f"measure_qubit {q} out of range for {n} qubits")
        if isinstance(self.encoding, AmplitudeEncoding):
            if self.encoding.num_qubits != n:
                raise ValueError("amplitude encoding qubit count mismatch")
        if isinstance(self.encoding, BlockEncoding):
            if self.encoding.pad_to != self.template.num_params:
                raise ValueError(
                    "block encoding pad_to must equal the circuit parameter count"
                )

    @property
    def observables(self) -> tuple[sv.Observable, sv.Observable]:
        return (
            sv.projector0(self.measure_qubit),
            sv.projector1(self.measure_qubit),
        )


def _input_state(h: Hypothesis, x) -> StateVector:
    """Resolve a raw input into the circuit's initial state."""
    n = h.template.num_qubits
    if isinstance(x, StateVector):
        if x.num_qubits != n:
            raise ValueError("input state qubit count mismatch")
        return x
    arr = np.asarray(x)
    if np.iscomplexobj(arr):
        return sv.from_amplitudes(arr, n)
    if isinstance(h.encoding, AmplitudeEncoding):
        return encode_amplitude(arr, h.encoding)
    if isinstance(h.encoding, BlockEncoding):
        return sv.zero_state(n)
    raise ValueError("real-valued input needs an encoding on the hypothesis")


def _input_angles(h: Hypothesis, x, theta: np.ndarray) -> np.ndarray:
    if isinstance(h.encoding, BlockEncoding) and not (
        isinstance(x, StateVector) or np.iscomplexobj(np.asarray(x))
    ):
        return encode_block(np.asarray(x, dtype=np.float64), theta, h.encoding)
    return np.asarray(theta, dtype=np.float64)


def hypothesis(h: Hypothesis, x, theta: np.ndarray) -> tuple[float, float]:
    """``(g0, g1)`` for one input, via the reference gate-by-gate path.

    ``g0 + g1 = 1`` up to floating error since the two projectors complete.
    """
    state = _input_state(h, x)
    angles = _input_angles(h, x, theta)
    out = circuits.run(h.template, angles, state)
    p0, p1 = sv.measure_probabilities(out, h.measure_qubit)
    return p0, p1


def _check_label(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (2,) or not (
        (a[0] == 1.0 and a[1] == 0.0) or (a[0] == 0.0 and a[1] == 1.0)
    ):
        raise ValueError(f"label must be one-hot (1,0) or (0,1), got {a!r}")
    return a


def loss(a: np.ndarray, g, kind: str = "ce") -> float:
    """Loss of hypothesis ``g = (g0, g1)`` against one-hot label ``a``."""
    a = _check_label(a)
    g = np.asarray(g, dtype=np.float64)
    if kind == "mse":
        return float(np.sum((a - g) ** 2))
    if kind == "ce":
        return float(-np.sum(a * np.log(np.maximum(g, EPSILON_CLIP))))
    raise ValueError(f"loss kind must be one of {LOSS_KINDS}, got {kind!r}")


def shift_gradient(
    h: Hypothesis, x, theta: np.ndarray, slot: int
) -> tuple[float, float]:
    """``(dg0/dtheta_slot, dg1/dtheta_slot)`` by two shifted evaluations.

    Exact for this gate set: every slot parameterizes a single
    ``exp(-i * theta * P / 2)`` rotation.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if not 0 <= slot < h.template.num_params:
        raise ValueError(f"slot {slot} out of range")
    up = theta.copy()
    up[slot] += np.pi / 2.0
    down = theta.copy()
    down[slot] -= np.pi / 2.0
    g_up = hypothesis(h, x, up)
    g_dn = hypothesis(h, x, down)
    return (
        0.5 * (g_up[0] - g_dn[0]),
        0.5 * (g_up[1] - g_dn[1]),
    )


def _loss_coeff(a: np.ndarray, g: np.ndarray, kind: str) -> np.ndarray:
    """``dL/dg`` for batched ``a``, ``g`` of shape (..., 2)."""
    if kind == "mse":
        return 2.0 * (g - a)
    if kind == "ce":
        return -a / np.maximum(g, EPSILON_CLIP)
    raise ValueError(f"loss kind must be one of {LOSS_KINDS}, got {kind!r}")


def loss_gradient(
    h: Hypothesis, x, a: np.ndarray, theta: np.ndarray, kind: str = "ce"
) -> np.ndarray:
    """``dL/dtheta`` for one sample via parameter shifts and the chain rule.

    Costs ``2 * num_params + 1`` hypothesis evaluations.
    """
    a = _check_label(a)
    theta = np.asarray(theta, dtype=np.float64)
    angles = _input_angles(h, x, theta)
    state = _input_state(h, x)
    eng = compile_template(h.template)
    g, dg, _ = eng.gradient(
        state.amplitudes[None, :].copy(), angles, h.measure_qubit
    )
    coeff = _loss_coeff(a, g[0], kind)
    return dg[0] @ coeff


def fd_gradient_oracle(
    h: Hypothesis,
    x,
    a: np.ndarray,
    theta: np.ndarray,
    kind: str = "ce",
    delta: float = 1e-5,
) -> np.ndarray:
    """Central finite differences of the loss; test oracle, never trains."""
    a = _check_label(a)
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.empty_like(theta)
    for k in range(theta.size):
        up = theta.copy()
        up[k] += delta
        down = theta.copy()
        down[k] -= delta
        l_up = loss(a, hypothesis(h, x, up), kind)
        l_dn = loss(a, hypothesis(h, x, down), kind)
        grad[k] = (l_up - l_dn) / (2.0 * delta)
    return grad


@dataclass
class BatchGrad:
    """Batched gradient result: per-sample g and losses, batch-mean grad."""

    g: np.ndarray  # (B, 2)
    losses: np.ndarray  # (B,)
    grad: np.ndarray  # (P,)
    evals: int


def _batch_losses(labels: np.ndarray, g: np.ndarray, kind: str) -> np.ndarray:
    if kind == "mse":
        return np.sum((labels - g) ** 2, axis=1)
    return -np.sum(labels * np.log(np.maximum(g, EPSILON_CLIP)), axis=1)


def batch_gradient(
    h: Hypothesis,
    init_states: np.ndarray,
    angles: np.ndarray,
    labels: np.ndarray,
    kind: str = "ce",
) -> BatchGrad:
    """Gradient of the batch-mean loss.

    ``init_states`` is ``(B, 2**n)`` complex128 (not mutated); ``angles`` is
    ``(P,)`` shared or ``(B, P)`` per-sample (block encoding).  Per-sample
    gradients are averaged in fixed sample order.
    """
    eng = compile_template(h.template)
    labels = np.asarray(labels, dtype=np.float64)
    g, dg, evals = eng.gradient(
        np.array(init_states, dtype=np.complex128), angles, h.measure_qubit
    )
    coeff = _loss_coeff(labels, g, kind)  # (B, 2)
    per_sample = np.einsum("bpk,bk->bp", dg, coeff)
    return BatchGrad(
        g=g,
        losses=_batch_losses(labels, g, kind),
        grad=per_sample.mean(axis=0),
        evals=evals,
    )


def batch_hypothesis(
    h: Hypothesis, init_states: np.ndarray, angles: np.ndarray
) -> np.ndarray:
    """Forward-only ``(B, 2)`` hypothesis values for a batch."""
    eng = compile_template(h.template)
    return eng.probabilities(
        np.array(init_states, dtype=np.complex128), angles, h.measure_qubit
    )
