"""Batched circuit executor with parameter-shift gradients.

``CompiledCircuit`` lowers a :class:`~qnnsim.circuits.CircuitTemplate` into a
flat op list driven by the numba kernels.  The three angles of each qubit in
a rotation layer are composed into a single 2x2 matrix before application.

Gradients use the parameter-shift rule with every shifted hypothesis value
computed explicitly (cost ``2 * num_params`` circuit evaluations per sample,
plus the forward pass).  What *is* shared is circuit structure: the state
just after rotation layer ``L`` is recorded during the forward pass, and the
evaluation for a shifted slot in layer ``L`` restarts there by applying the
2x2 fix-up ``u(shifted) @ u(base)^dagger`` on the affected qubit, followed by
the unchanged remainder of the circuit.  All ``6n`` variants of a layer
travel as one ensemble so each suffix layer is a single kernel pass.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import kernels
from .circuits import SLOTS_PER_QUBIT, CircuitTemplate

_OP_ROT = "rot"
_OP_CX = "cx"
_OP_CZ = "cz"
_OP_DENSE = "dense"

HALF_PI = np.pi / 2.0


def rot_mats(angles: np.ndarray) -> np.ndarray:
    """Compose ``RZ(c) @ RX(b) @ RZ(a)`` for angle triples ``(..., 3)``.

    Returns ``(..., 2, 2)`` complex128.  Closed form of the per-qubit product
    in a rotation layer (application order RZ(a), RX(b), RZ(c)).
    """
    a = angles[..., 0]
    b = angles[..., 1]
    c = angles[..., 2]
    cb = np.cos(0.5 * b)
    sb = np.sin(0.5 * b)
    sum_ac = 0.5 * (a + c)
    dif_ac = 0.5 * (a - c)
    u = np.empty(a.shape + (2, 2), dtype=np.complex128)
    u[..., 0, 0] = cb * np.exp(-1j * sum_ac)
    u[..., 0, 1] = -1j * sb * np.exp(1j * dif_ac)
    u[..., 1, 0] = -1j * sb * np.exp(-1j * dif_ac)
    u[..., 1, 1] = cb * np.exp(1j * sum_ac)
    return u


class CompiledCircuit:
    """Executor for one template over batches of statevectors."""

    def __init__(self, template: CircuitTemplate):
        self.template = template
        self.n = template.num_qubits
        self.dim = 2**self.n
        self.num_params = template.num_params
        self.ops: list[tuple] = []
        for layer in template.layers:
            if layer.kind == "rot":
                table = np.asarray(layer.param_slots, dtype=np.int64).reshape(
                    self.n, SLOTS_PER_QUBIT
                )
                self.ops.append((_OP_ROT, table))
            elif layer.kind in ("cx", "cx2"):
                self.ops.append((_OP_CX, 2 if layer.kind == "cx2" else 1))
            elif layer.kind == "cz":
                self.ops.append((_OP_CZ,))
            else:
                self.ops.append(
                    (_OP_DENSE, np.ascontiguousarray(layer.unitary.T))
                )
        self.rot_op_indices = [
            i for i, op in enumerate(self.ops) if op[0] == _OP_ROT
        ]
        # variant v = (q0 * 3 + p) * 2 + (0 for +, 1 for -); same for any layer
        nv = 2 * SLOTS_PER_QUBIT * self.n
        self.variant_shifts = np.empty(nv, dtype=np.int64)
        for q0 in range(self.n):
            for p in range(SLOTS_PER_QUBIT):
                for si in range(2):
                    self.variant_shifts[(q0 * SLOTS_PER_QUBIT + p) * 2 + si] = (
                        self.n - 1 - q0
                    )

    def _check_angles(self, angles: np.ndarray) -> bool:
        """Return True for shared angles (P,), False for per-sample (B, P)."""
        if angles.ndim == 1:
            if angles.shape != (self.num_params,):
                raise ValueError(
                    f"expected {self.num_params} angles, got {angles.shape}"
                )
            return True
        if angles.ndim == 2 and angles.shape[1] == self.num_params:
            return False
        raise ValueError(f"bad angle array shape {angles.shape}")

    def _layer_mats(self, angles: np.ndarray, shared: bool):
        """Composed per-qubit matrices and raw angle triples per rot layer."""
        mats = {}
        triples = {}
        for i in self.rot_op_indices:
            table = self.ops[i][1]
            th = angles[table] if shared else angles[:, table]
            triples[i] = th
            mats[i] = rot_mats(th)
        return mats, triples

    def forward(
        self,
        states: np.ndarray,
        angles: np.ndarray,
        record: bool = False,
    ):
        """Run the circuit over ``states`` (mutated in place / reused).

        Returns ``(final_states, trace)`` where ``trace`` is None unless
        ``record`` is set, in which case it holds the per-rotation-layer
        post-rotation states plus composed matrices for gradient reuse.
        """
        angles = np.asarray(angles, dtype=np.float64)
        shared = self._check_angles(angles)
        states = np.ascontiguousarray(states, dtype=np.complex128)
        nb = states.shape[0]
        mats, triples = self._layer_mats(angles, shared)
        scratch = None
        post_rot = {}
        for i, op in enumerate(self.ops):
            kind = op[0]
            if kind == _OP_ROT:
                if shared:
                    kernels.rot_layer_shared(states, mats[i], self.n)
                else:
                    kernels.rot_layer_indexed(states, mats[i], self.n, nb)
                if record:
                    post_rot[i] = states.copy()
            elif kind == _OP_CX:
                kernels.cx_chain(states, self.n, op[1])
            elif kind == _OP_CZ:
                kernels.cz_chain(states, self.n)
            else:
                if scratch is None:
                    scratch = np.empty_like(states)
                np.matmul(states, op[1], out=scratch)
                states, scratch = scratch, states
        trace = None
        if record:
            trace = {
                "post_rot": post_rot,
                "mats": mats,
                "triples": triples,
                "shared": shared,
            }
        return states, trace

    def probabilities(
        self, states: np.ndarray, angles: np.ndarray, measure_qubit: int
    ) -> np.ndarray:
        """Forward pass returning ``(B, 2)`` projector probabilities."""
        final, _ = self.forward(states, angles)
        return kernels.probs_pair(final, self.n - measure_qubit)

    def _suffix(self, ens, start_op, mats, nb, scratch):
        """Apply ops ``start_op..end`` to an ensemble (per-sample mats tile
        with period ``nb``)."""
        shared = mats["shared"]
        layer_mats = mats["mats"]
        for j in range(start_op, len(self.ops)):
            op = self.ops[j]
            kind = op[0]
            if kind == _OP_ROT:
                if shared:
                    kernels.rot_layer_shared(ens, layer_mats[j], self.n)
                else:
                    kernels.rot_layer_indexed(ens, layer_mats[j], self.n, nb)
            elif kind == _OP_CX:
                kernels.cx_chain(ens, self.n, op[1])
            elif kind == _OP_CZ:
                kernels.cz_chain(ens, self.n)
            else:
                np.matmul(ens, op[1], out=scratch)
                ens, scratch = scratch, ens
        return ens, scratch

    def _fixups(self, th, base_mats):
        """Fix-up matrices for all 6n variants of one rotation layer.

        ``th`` is the layer's angle triples, ``(n, 3)`` shared or ``(B, n, 3)``
        per-sample.  Returns ``(V, 2, 2)`` or ``(V, B, 2, 2)``.
        """
        shared = th.ndim == 2
        parts = []
        for p in range(SLOTS_PER_QUBIT):
            for sign in (HALF_PI, -HALF_PI):
                shifted = th.copy()
                shifted[..., p] += sign
                u_s = rot_mats(shifted)
                # A = u(shifted) @ u(base)^dagger
                a = np.einsum("...ij,...kj->...ik", u_s, base_mats.conj())
                parts.append(a)
        if shared:
            stack = np.stack(parts, axis=1)  # (n, 6, 2, 2)
            return np.ascontiguousarray(
                stack.reshape(-1, 2, 2)
            )  # (6n, 2, 2), variant-major (q0, p, sign)
        stack = np.stack(parts, axis=2)  # (B, n, 6, 2, 2)
        return np.ascontiguousarray(
            stack.transpose(1, 2, 0, 3, 4).reshape(
                -1, th.shape[0], 2, 2
            )
        )  # (6n, B, 2, 2)

    def gradient(
        self, states: np.ndarray, angles: np.ndarray, measure_qubit: int
    ):
        """Projector probabilities and their parameter-shift derivatives.

        Returns ``(g, dg, evals)``: ``g`` is ``(B, 2)``, ``dg`` is
        ``(B, P, 2)`` with ``dg[b, k, j] = d g_j / d angle_k`` for sample
        ``b``, and ``evals`` counts hypothesis evaluations,
        ``B * (2 * P + 1)``.
        """
        nb = states.shape[0]
        meas_shift = self.n - measure_qubit
        final, trace = self.forward(states, angles, record=True)
        g = kernels.probs_pair(final, meas_shift)
        dg = np.empty((nb, self.num_params, 2), dtype=np.float64)
        nv = 2 * SLOTS_PER_QUBIT * self.n
        ens = np.empty((nv * nb, self.dim), dtype=np.complex128)
        scratch = (
            np.empty_like(ens)
            if any(op[0] == _OP_DENSE for op in self.ops)
            else ens  # unused without dense ops
        )
        for oi in self.rot_op_indices:
            table = self.ops[oi][1]
            post = trace["post_rot"][oi]
            np.copyto(ens.reshape(nv, nb, self.dim), post[None, :, :])
            fix = self._fixups(trace["triples"][oi], trace["mats"][oi])
            if trace["shared"]:
                kernels.fixup_variants_shared(ens, self.variant_shifts, fix, nb)
            else:
                kernels.fixup_variants_indexed(ens, self.variant_shifts, fix, nb)
            out, _ = self._suffix(ens, oi + 1, trace, nb, scratch)
            pr = kernels.probs_pair(out, meas_shift)
            # (n, 3, sign, B, 2) -> slope (n*3, B, 2)
            pr = pr.reshape(self.n, SLOTS_PER_QUBIT, 2, nb, 2)
            slope = 0.5 * (pr[:, :, 0] - pr[:, :, 1])
            dg[:, table.reshape(-1), :] = slope.reshape(-1, nb, 2).transpose(
                1, 0, 2
            )
        evals = nb * (2 * self.num_params + 1)
        return g, dg, evals


@lru_cache(maxsize=32)
def compile_template(template: CircuitTemplate) -> CompiledCircuit:
    return CompiledCircuit(template)
