"""Spin-chain Hamiltonians, exact diagonalization, and dataset generation.

Two models are provided:

* ``cluster_ising``: periodic chain
  ``H = -sum_j X_{j-1} Z_j X_{j+1} + lam * sum_j Y_j Y_{j+1}``
  whose ground state crosses from a symmetry-protected (cluster) phase to an
  antiferromagnetic phase at ``lam = 1``.
* ``aubry_andre``: open chain
  ``H = -(g/2) * sum_k (X_k X_{k+1} + Y_k Y_{k+1}) - sum_k (V_k/2) Z_k``
  with quasiperiodic potential ``V_k = v * cos(2*pi*alpha*k + phi)`` and
  ``alpha = (sqrt(5) - 1) / 2``.

Site indices are 1-based and site 1 is the most significant bit, matching
``statevector``.  Matrices are built from sparse Pauli-string Kronecker
products and densified for diagonalization; this is exact and adequate for
the N <= 14 sizes this package targets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .statevector import StateVector

ALPHA = (np.sqrt(5.0) - 1.0) / 2.0

_PAULI = {
    "I": sp.identity(2, format="csr", dtype=np.complex128),
    "X": sp.csr_matrix(np.array([[0, 1], [1, 0]], dtype=np.complex128)),
    "Y": sp.csr_matrix(np.array([[0, -1j], [1j, 0]], dtype=np.complex128)),
    "Z": sp.csr_matrix(np.array([[1, 0], [0, -1]], dtype=np.complex128)),
}

_MODELS = ("cluster_ising", "aubry_andre")


@dataclass(frozen=True)
class HamiltonianSpec:
    """Parameters of one spin-chain Hamiltonian instance.

    ``lam`` is the cluster-Ising coupling ratio; ``g``, ``v``, ``phi`` are the
    Aubry-Andre hopping, potential magnitude, and potential phase.  Fields not
    used by ``model`` are ignored by the builders but participate in equality,
    so construct through :func:`cluster_ising` / :func:`aubry_andre`.
    """

    model: str
    num_sites: int
    lam: float = 0.0
    g: float = 1.0
    v: float = 0.0
    phi: float = 0.0
    boundary: str = "open"

    def __post_init__(self):
        if self.model not in _MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.boundary not in ("open", "periodic"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        lo = 3 if self.model == "cluster_ising" else 2
        if not lo <= self.num_sites <= 14:
            raise ValueError(
                f"{self.model} needs {lo}..14 sites, got {self.num_sites}"
            )


def cluster_ising(num_sites: int, lam: float) -> HamiltonianSpec:
    """Cluster-Ising chain with periodic boundary and coupling ``lam``."""
    return HamiltonianSpec("cluster_ising", num_sites, lam=lam, boundary="periodic")


def aubry_andre(
    num_sites: int, g: float = 1.0, v: float = 0.0, phi: float = 0.0
) -> HamiltonianSpec:
    """Aubry-Andre chain with open boundary."""
    return HamiltonianSpec("aubry_andre", num_sites, g=g, v=v, phi=phi, boundary="open")


def pauli_string(num_sites: int, ops: dict[int, str]) -> sp.csr_matrix:
    """Sparse operator placing ``ops[site]`` on each listed 1-based site.

    Site 1 is the leftmost Kronecker factor (most significant bit).
    """
    for site in ops:
        if not 1 <= site <= num_sites:
            raise ValueError(f"site {site} out of range for {num_sites} sites")
    out = _PAULI[ops.get(1, "I")]
    for site in range(2, num_sites + 1):
        out = sp.kron(out, _PAULI[ops.get(site, "I")], format="csr")
    return out


def _wrap(site: int, num_sites: int) -> int:
    return (site - 1) % num_sites + 1


def build_matrix(spec: HamiltonianSpec) -> np.ndarray:
    """Dense Hermitian matrix of the Hamiltonian (2^N x 2^N complex128)."""
    n = spec.num_sites
    acc = sp.csr_matrix((2**n, 2**n), dtype=np.complex128)
    if spec.model == "cluster_ising":
        for j in range(1, n + 1):
            acc = acc - pauli_string(
                n, {_wrap(j - 1, n): "X", j: "Z", _wrap(j + 1, n): "X"}
            )
            acc = acc + spec.lam * pauli_string(n, {j: "Y", _wrap(j + 1, n): "Y"})
    else:
        for k in range(1, n):
            acc = acc - 0.5 * spec.g * (
                pauli_string(n, {k: "X", k + 1: "X"})
                + pauli_string(n, {k: "Y", k + 1: "Y"})
            )
        for k in range(1, n + 1):
            v_k = spec.v * np.cos(2.0 * np.pi * ALPHA * k + spec.phi)
            acc = acc - 0.5 * v_k * pauli_string(n, {k: "Z"})
    return np.ascontiguousarray(acc.toarray())


@dataclass
class EigenPair:
    """Ground-state energy and state; ``gap`` is E1 - E0 when computed."""

    energy: float
    state: StateVector
    gap: float | None = None


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude amplitude is real > 0."""
    i = int(np.argmax(np.abs(vec)))
    pivot = vec[i]
    return vec * (pivot.conjugate() / abs(pivot))


def ground_state(spec: HamiltonianSpec) -> EigenPair:
    """Lowest eigenpair by dense diagonalization, with a fixed global phase."""
    h = build_matrix(spec)
    try:
        w, vecs = scipy.linalg.eigh(h, subset_by_index=[0, 1])
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - defensive
        raise RuntimeError(
            f"eigensolver failed for {spec.model} N={spec.num_sites}: {exc}"
        ) from exc
    vec = _fix_phase(np.ascontiguousarray(vecs[:, 0], dtype=np.complex128))
    state = StateVector(spec.num_sites, vec)
    return EigenPair(float(w[0]), state, gap=float(w[1] - w[0]))


def evolution_unitary(spec: HamiltonianSpec, t: float) -> np.ndarray:
    """Dense ``exp(-i * H * t)`` via the eigendecomposition of ``H``."""
    if not np.isfinite(t):
        raise ValueError("evolution time must be finite")
    h = build_matrix(spec)
    w, q = scipy.linalg.eigh(h)
    return np.ascontiguousarray((q * np.exp(-1j * w * t)) @ q.conj().T)


#: absolute tolerance for dropping the critical point from the SPT grid
CRITICAL_LAMBDA_TOL = 1e-9


def make_spt_dataset(
    num_sites: int,
    start: float = 0.0,
    stop: float = 2.0,
    step: float = 0.001,
):
    """Labeled cluster-Ising ground states across a lambda grid.

    The grid runs ``start, start+step, ..., stop`` inclusive; points with
    ``|lam - 1| < CRITICAL_LAMBDA_TOL`` are dropped because the critical point
    belongs to neither phase.  Labels are one-hot: ``(1, 0)`` for ``lam < 1``
    and ``(0, 1)`` for ``lam > 1``.  Returns a ``data_io.LabeledDataset`` of
    ground states with per-state lambdas and spectral gaps in ``meta``.
    """
    from .data_io import LabeledDataset

    if not 3 <= num_sites <= 12:
        raise ValueError(f"num_sites must be in 3..12, got {num_sites}")
    if step <= 0:
        raise ValueError("step must be positive")
    if stop < start:
        raise ValueError("stop must be >= start")
    count = int(np.floor((stop - start) / step + 0.5)) + 1
    grid = [start + i * step for i in range(count)]
    lams = [lam for lam in grid if abs(lam - 1.0) >= CRITICAL_LAMBDA_TOL]

    dim = 2**num_sites
    states = np.empty((len(lams), dim), dtype=np.complex128)
    labels = np.empty((len(lams), 2), dtype=np.float64)
    gaps = np.empty(len(lams), dtype=np.float64)
    for i, lam in enumerate(lams):
        pair = ground_state(cluster_ising(num_sites, lam))
        states[i] = pair.state.amplitudes
        gaps[i] = pair.gap
        labels[i] = (1.0, 0.0) if lam < 1.0 else (0.0, 1.0)
    meta = {
        "name": f"spt{num_sites}",
        "model": "cluster_ising",
        "num_sites": num_sites,
        "grid": (start, stop, step),
        "lambdas": np.array(lams, dtype=np.float64),
        "gaps": gaps,
        "generator": "exact-diagonalization",
    }
    return LabeledDataset(
        features=None, states=states, labels=labels, num_qubits=num_sites, meta=meta
    )
