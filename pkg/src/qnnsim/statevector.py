"""Dense statevector simulation of small qubit registers.

Conventions shared by every module in this package:

* Qubit indices are 1-based, ``1 <= q <= num_qubits``.
* Qubit 1 is the most significant bit of the basis-state index.  For a
  2-qubit register the amplitude order is ``|00>, |01>, |10>, |11>`` and
  basis index ``i`` assigns qubit ``q`` the bit ``(i >> (n - q)) & 1``.
* Rotation gates are ``R_P(theta) = exp(-i * theta * P / 2)`` for
  ``P in {X, Y, Z}``.

States are contiguous ``complex128`` arrays of length ``2**n``.  Gates are
applied through strided index arithmetic on reshaped views; no ``2**n``-sized
matrices are ever built except for explicit ``dense`` gates (used by the
analog entangling layers).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_QUBITS = 14

_ROTATIONS = ("rx", "ry", "rz")
_CONTROLLED = ("cnot", "cz")
_KINDS = _ROTATIONS + _CONTROLLED + ("dense",)


@dataclass
class StateVector:
    """Normalized pure state of ``num_qubits`` qubits."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise ValueError(f"num_qubits must be in 1..{MAX_QUBITS}, got {self.num_qubits}")
        amp = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amp.shape != (2**self.num_qubits,):
            raise ValueError(
                f"amplitude vector has shape {self.amplitudes.shape}, "
                f"expected ({2**self.num_qubits},)"
            )
        self.amplitudes = amp

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def zero_state(num_qubits: int) -> StateVector:
    """|0...0> on ``num_qubits`` qubits."""
    amp = np.zeros(2**num_qubits, dtype=np.complex128)
    amp[0] = 1.0
    return StateVector(num_qubits, amp)


def from_amplitudes(values: np.ndarray, num_qubits: int, normalize: bool = False) -> StateVector:
    """Build a state from an explicit amplitude vector.

    With ``normalize=False`` the vector must already have unit norm to within
    1e-8; with ``normalize=True`` any nonzero vector is accepted and rescaled.
    """
    amp = np.asarray(values, dtype=np.complex128)
    if amp.shape != (2**num_qubits,):
        raise ValueError(f"expected {2**num_qubits} amplitudes, got {amp.shape}")
    nrm = np.linalg.norm(amp)
    if normalize:
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        amp = amp / nrm
    elif abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"amplitude vector has norm {nrm!r}, expected 1 within 1e-8")
    return StateVector(num_qubits, amp.copy())


@dataclass(frozen=True)
class GateSpec:
    """One gate: a rotation, CNOT, CZ, or an explicit dense unitary.

    ``target`` (and ``control`` where applicable) are 1-based qubit indices.
    A dense gate acts on the ``k`` adjacent qubits ``target .. target+k-1``
    where its ``2**k x 2**k`` matrix fixes ``k``.
    """

    kind: str
    target: int
    control: int | None = None
    angle: float = 0.0
    matrix: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.target < 1:
            raise ValueError("target must be a 1-based qubit index")
        if self.kind in _CONTROLLED:
            if self.control is None:
                raise ValueError(f"{self.kind} requires a control qubit")
            if self.control == self.target:
                raise ValueError("control and target must differ")
            if self.control < 1:
                raise ValueError("control must be a 1-based qubit index")
        elif self.control is not None:
            raise ValueError(f"{self.kind} takes no control qubit")
        if self.kind in _ROTATIONS and not np.isfinite(self.angle):
            raise ValueError("rotation angle must be finite")
        if self.kind == "dense":
            m = self.matrix
            if m is None:
                raise ValueError("dense gate requires a matrix")
            m = np.ascontiguousarray(m, dtype=np.complex128)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError("dense matrix must be square")
            dim = m.shape[0]
            if dim < 2 or (dim & (dim - 1)) != 0:
                raise ValueError("dense matrix dimension must be a power of two")
            err = np.abs(m.conj().T @ m - np.eye(dim)).max()
            if err > 1e-9:
                raise ValueError(f"dense matrix is not unitary (deviation {err:.3e})")
            object.__setattr__(self, "matrix", m)
        elif self.matrix is not None:
            raise ValueError(f"{self.kind} takes no matrix")

    @property
    def span(self) -> int:
        """Number of adjacent qubits a dense gate covers (1 otherwise)."""
        if self.kind == "dense":
            return int(self.matrix.shape[0]).bit_length() - 1
        return 1


def rx(target: int, angle: float) -> GateSpec:
    return GateSpec("rx", target, angle=angle)


def ry(target: int, angle: float) -> GateSpec:
    return GateSpec("ry", target, angle=angle)


def rz(target: int, angle: float) -> GateSpec:
    return GateSpec("rz", target, angle=angle)


def cnot(control: int, target: int) -> GateSpec:
    return GateSpec("cnot", target, control=control)


def cz(control: int, target: int) -> GateSpec:
    return GateSpec("cz", target, control=control)


def dense(matrix: np.ndarray, target: int = 1) -> GateSpec:
    return GateSpec("dense", target, matrix=matrix)


def rotation_matrix(kind: str, angle: float) -> np.ndarray:
    """2x2 matrix of ``exp(-i * angle * P / 2)``."""
    c = np.cos(angle / 2.0)
    s = np.sin(angle / 2.0)
    if kind == "rx":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    if kind == "ry":
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if kind == "rz":
        return np.array([[c - 1j * s, 0.0], [0.0, c + 1j * s]], dtype=np.complex128)
    raise ValueError(f"not a rotation kind: {kind!r}")


def _check_qubit(state: StateVector, q: int, what: str = "qubit") -> None:
    if not 1 <= q <= state.num_qubits:
        raise ValueError(f"{what} {q} out of range for {state.num_qubits} qubits")


def apply_gate(state: StateVector, gate: GateSpec) -> StateVector:
    """Apply ``gate`` to ``state`` in place and return the state.

    Single-qubit and two-qubit gates touch only strided views of the
    amplitude array; dense gates contract their matrix against the adjacent
    target block.
    """
    n = state.num_qubits
    amp = state.amplitudes
    if gate.kind in _ROTATIONS:
        _check_qubit(state, gate.target)
        u = rotation_matrix(gate.kind, gate.angle)
        view = amp.reshape(2 ** (gate.target - 1), 2, 2 ** (n - gate.target))
        a0 = view[:, 0, :].copy()
        a1 = view[:, 1, :]
        view[:, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
        view[:, 1, :] = u[1, 0] * a0 + u[1, 1] * a1
        return state
    if gate.kind in _CONTROLLED:
        _check_qubit(state, gate.target, "target")
        _check_qubit(state, gate.control, "control")
        q1, q2 = sorted((gate.control, gate.target))
        view = amp.reshape(
            2 ** (q1 - 1), 2, 2 ** (q2 - q1 - 1), 2, 2 ** (n - q2)
        )
        if gate.kind == "cz":
            view[:, 1, :, 1, :] *= -1.0
        elif gate.control == q1:
            tmp = view[:, 1, :, 0, :].copy()
            view[:, 1, :, 0, :] = view[:, 1, :, 1, :]
            view[:, 1, :, 1, :] = tmp
        else:
            tmp = view[:, 0, :, 1, :].copy()
            view[:, 0, :, 1, :] = view[:, 1, :, 1, :]
            view[:, 1, :, 1, :] = tmp
        return state
    # dense
    k = gate.span
    if gate.target < 1 or gate.target + k - 1 > n:
        raise ValueError(
            f"dense gate on qubits {gate.target}..{gate.target + k - 1} "
            f"does not fit in {n} qubits"
        )
    view = amp.reshape(2 ** (gate.target - 1), 2**k, 2 ** (n - gate.target - k + 1))
    amp[:] = np.einsum("ij,ajb->aib", gate.matrix, view).reshape(-1)
    return state


@dataclass(frozen=True)
class Observable:
    """Single-qubit observable: Pauli-Z or a computational-basis projector."""

    kind: str  # "z" | "p0" | "p1"
    qubit: int

    def __post_init__(self):
        if self.kind not in ("z", "p0", "p1"):
            raise ValueError(f"unknown observable kind {self.kind!r}")
        if self.qubit < 1:
            raise ValueError("qubit must be a 1-based index")


def pauli_z(qubit: int) -> Observable:
    return Observable("z", qubit)


def projector0(qubit: int) -> Observable:
    return Observable("p0", qubit)


def projector1(qubit: int) -> Observable:
    return Observable("p1", qubit)


def measure_probabilities(state: StateVector, qubit: int) -> tuple[float, float]:
    """(P(0), P(1)) for a computational-basis measurement of one qubit."""
    _check_qubit(state, qubit)
    view = state.amplitudes.reshape(
        2 ** (qubit - 1), 2, 2 ** (state.num_qubits - qubit)
    )
    w = np.abs(view) ** 2
    p0 = float(w[:, 0, :].sum())
    p1 = float(w[:, 1, :].sum())
    return p0, p1


def expectation(state: StateVector, obs: Observable) -> float:
    """Exact expectation value of ``obs`` in ``state`` (no sampling)."""
    p0, p1 = measure_probabilities(state, obs.qubit)
    if obs.kind == "z":
        return p0 - p1
    if obs.kind == "p0":
        return p0
    return p1
