"""Layered classifier circuits: parameterized rotations + entangling layers.

A depth-``d`` classifier is ``d`` composite blocks.  Each block is one
parameterized rotation layer followed by one entangling layer.  The rotation
layer gives every qubit three angle slots applied in the order
``RZ(a) -> RX(b) -> RZ(c)``; slots are numbered contiguously
``3*(q-1) + p`` within a layer, so a depth-``d`` circuit on ``n`` qubits has
``3 * n * d`` parameters and slot ``3*n*(L-1) + 3*(q-1) + p`` addresses
angle ``p`` of qubit ``q`` in block ``L`` (``L``, ``q`` 1-based, ``p`` in
0..2).

Entangling layers carry no parameters:

* ``cz`` / ``cx``: a chain of CZ / CNOT gates ``q -> q+1`` for
  ``q = 1 .. n-1``;
* ``cx2``: the CNOT chain applied twice;
* analog: one dense unitary ``exp(-i H t)`` for a spin-model Hamiltonian,
  cached per ``(H, t)`` because diagonalizing ``H`` dwarfs applying it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import statevector as sv
from .spin_models import HamiltonianSpec, evolution_unitary
from .statevector import StateVector

ENT_KINDS = ("cz", "cx", "cx2")

SLOTS_PER_QUBIT = 3


@dataclass(frozen=True)
class LayerSpec:
    """One circuit layer: parameterized rotations, an entangler, or analog."""

    kind: str  # "rot" | "cz" | "cx" | "cx2" | "analog"
    num_qubits: int
    param_slots: tuple[int, ...] = ()
    unitary: np.ndarray | None = field(default=None, compare=False)
    t_evo: float = 0.0
    h_spec: HamiltonianSpec | None = None

    def __post_init__(self):
        if self.kind not in ("rot",) + ENT_KINDS + ("analog",):
            raise ValueError(f"unknown layer kind {self.kind!r}")
        if self.num_qubits < 1:
            raise ValueError("layer needs at least one qubit")
        if self.kind == "rot":
            if len(self.param_slots) != SLOTS_PER_QUBIT * self.num_qubits:
                raise ValueError(
                    f"rotation layer on {self.num_qubits} qubits needs "
                    f"{SLOTS_PER_QUBIT * self.num_qubits} slots, "
                    f"got {len(self.param_slots)}"
                )
        elif self.param_slots:
            raise ValueError("entangling layers carry no parameters")
        if self.kind in ENT_KINDS and self.num_qubits < 2:
            raise ValueError("entangling chains need at least 2 qubits")
        if self.kind == "analog" and self.unitary is None:
            raise ValueError("analog layer requires its unitary")


def param_rotation_layer(num_qubits: int, slot_base: int) -> LayerSpec:
    """Rotation layer whose slots are ``slot_base .. slot_base + 3n - 1``."""
    if slot_base < 0:
        raise ValueError("slot_base must be >= 0")
    nslots = SLOTS_PER_QUBIT * num_qubits
    return LayerSpec("rot", num_qubits, tuple(range(slot_base, slot_base + nslots)))


def ent_layer(num_qubits: int, kind: str) -> LayerSpec:
    """Fixed entangling chain of the given kind."""
    if kind not in ENT_KINDS:
        raise ValueError(f"entangler kind must be one of {ENT_KINDS}, got {kind!r}")
    return LayerSpec(kind, num_qubits)


_analog_cache: dict[tuple, np.ndarray] = {}


def _cache_key(h_spec: HamiltonianSpec, t: float) -> tuple:
    # round to 12 significant digits so equal-valued times share an entry
    return (
        h_spec.model,
        h_spec.num_sites,
        h_spec.lam,
        h_spec.g,
        h_spec.v,
        h_spec.phi,
        h_spec.boundary,
        float(f"{t:.12g}"),
    )


def analog_layer(h_spec: HamiltonianSpec, t: float) -> LayerSpec:
    """Entangling layer ``exp(-i H t)`` for the given spin-model Hamiltonian."""
    if t < 0:
        raise ValueError("evolution time must be >= 0")
    key = _cache_key(h_spec, t)
    u = _analog_cache.get(key)
    if u is None:
        u = evolution_unitary(h_spec, t)
        _analog_cache[key] = u
    return LayerSpec(
        "analog", h_spec.num_sites, unitary=u, t_evo=t, h_spec=h_spec
    )


@dataclass(frozen=True)
class CircuitTemplate:
    """A fixed layer sequence with ``num_params`` free angle slots."""

    num_qubits: int
    layers: tuple[LayerSpec, ...]
    num_params: int

    def __post_init__(self):
        slots: list[int] = []
        for layer in self.layers:
            if layer.num_qubits != self.num_qubits:
                raise ValueError("layer qubit count does not match template")
            slots.extend(layer.param_slots)
        if sorted(slots) != list(range(self.num_params)):
            raise ValueError(
                f"parameter slots are not a permutation of 0..{self.num_params - 1}"
            )


def build_classifier(
    num_qubits: int, depth: int, ent: str | LayerSpec
) -> CircuitTemplate:
    """Depth-``d`` block classifier with the given entangler.

    ``ent`` is either one of ``ENT_KINDS`` or a prebuilt analog
    :class:`LayerSpec` (reused in every block).
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if isinstance(ent, LayerSpec):
        if ent.kind != "analog":
            raise ValueError("a LayerSpec entangler must be an analog layer")
        if ent.num_qubits != num_qubits:
            raise ValueError(
                f"analog layer is for {ent.num_qubits} qubits, circuit has {num_qubits}"
            )
        ent_spec = ent
    else:
        ent_spec = ent_layer(num_qubits, ent)
    layers: list[LayerSpec] = []
    nslots = SLOTS_PER_QUBIT * num_qubits
    for block in range(depth):
        layers.append(param_rotation_layer(num_qubits, block * nslots))
        layers.append(ent_spec)
    return CircuitTemplate(num_qubits, tuple(layers), depth * nslots)


def _chain_gates(num_qubits: int, kind: str) -> list[sv.GateSpec]:
    make = sv.cz if kind == "cz" else sv.cnot
    return [make(q, q + 1) for q in range(1, num_qubits)]


def layer_gates(layer: LayerSpec, angles: np.ndarray) -> list[sv.GateSpec]:
    """Expand one layer into elementary gates (reference decomposition)."""
    n = layer.num_qubits
    if layer.kind == "rot":
        gates = []
        for q in range(1, n + 1):
            s = layer.param_slots[SLOTS_PER_QUBIT * (q - 1)]
            gates.append(sv.rz(q, float(angles[s])))
            gates.append(sv.rx(q, float(angles[s + 1])))
            gates.append(sv.rz(q, float(angles[s + 2])))
        return gates
    if layer.kind in ("cz", "cx"):
        return _chain_gates(n, layer.kind)
    if layer.kind == "cx2":
        return _chain_gates(n, "cx") * 2
    return [sv.dense(layer.unitary, target=1)]


def run(
    template: CircuitTemplate, angles: np.ndarray, state: StateVector
) -> StateVector:
    """Apply the circuit to ``state`` (not mutated) and return the output.

    This is the reference gate-by-gate path; the training engine applies the
    same layers through batched kernels.
    """
    angles = np.asarray(angles, dtype=np.float64)
    if angles.shape != (template.num_params,):
        raise ValueError(
            f"expected {template.num_params} angles, got shape {angles.shape}"
        )
    if state.num_qubits != template.num_qubits:
        raise ValueError("state qubit count does not match template")
    out = state.copy()
    for layer in template.layers:
        for gate in layer_gates(layer, angles):
            sv.apply_gate(out, gate)
    return out
