"""Dense Kronecker-product reference for small registers.

Builds explicit ``2**n x 2**n`` gate matrices with ``np.kron`` only, so the
result is independent of the strided apply path in ``qnnsim.statevector``.
Intended for n <= ~6.
"""

import numpy as np

from qnnsim import statevector as sv

I2 = np.eye(2, dtype=np.complex128)
P0 = np.array([[1, 0], [0, 0]], dtype=np.complex128)
P1 = np.array([[0, 0], [0, 1]], dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def place(ops: dict, num_qubits: int) -> np.ndarray:
    """kron over qubits 1..n, identity in empty slots, qubit 1 leftmost."""
    out = np.eye(1, dtype=np.complex128)
    for q in range(1, num_qubits + 1):
        out = np.kron(out, ops.get(q, I2))
    return out


def gate_matrix(gate: sv.GateSpec, num_qubits: int) -> np.ndarray:
    if gate.kind in ("rx", "ry", "rz"):
        u = sv.rotation_matrix(gate.kind, gate.angle)
        return place({gate.target: u}, num_qubits)
    if gate.kind == "cnot":
        return place({gate.control: P0}, num_qubits) + place(
            {gate.control: P1, gate.target: X}, num_qubits
        )
    if gate.kind == "cz":
        return place({gate.control: P0}, num_qubits) + place(
            {gate.control: P1, gate.target: Z}, num_qubits
        )
    if gate.kind == "dense":
        left = np.eye(2 ** (gate.target - 1), dtype=np.complex128)
        right = np.eye(
            2 ** (num_qubits - gate.target - gate.span + 1), dtype=np.complex128
        )
        return np.kron(np.kron(left, gate.matrix), right)
    raise ValueError(gate.kind)


def circuit_matrix(gates, num_qubits: int) -> np.ndarray:
    u = np.eye(2**num_qubits, dtype=np.complex128)
    for g in gates:
        u = gate_matrix(g, num_qubits) @ u
    return u
