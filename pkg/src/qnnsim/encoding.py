"""Classical-data encodings: amplitude encoding and block (angle) encoding.

Amplitude encoding writes a real feature vector into the amplitudes of an
``n``-qubit state, zero-padding up to ``2**n`` and normalizing.  Block
encoding folds features into the rotation angles of a circuit template:
``angles[k] = scale * x_pad[k] + theta[k]`` where ``x_pad`` is the feature
vector zero-padded to the circuit's parameter count and ``theta`` are the
trainable angles.  Slot ``k`` follows the circuit's interleaved layout
(``circuits``: layer-major, then qubit, then position), so features spread
across all blocks of the circuit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .statevector import StateVector, from_amplitudes

PAD_POLICIES = ("zero", "error")


@dataclass(frozen=True)
class AmplitudeEncoding:
    """Feature vector -> statevector amplitudes.

    ``pad_policy="zero"`` accepts any length up to ``2**num_qubits`` and
    zero-pads; ``"error"`` demands an exact length match.  ``normalize=False``
    requires the (padded) vector to be unit norm already.
    """

    num_qubits: int
    pad_policy: str = "zero"
    normalize: bool = True

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        if self.pad_policy not in PAD_POLICIES:
            raise ValueError(f"pad_policy must be one of {PAD_POLICIES}")


@dataclass(frozen=True)
class BlockEncoding:
    """Feature vector -> additive shifts on the first ``pad_to`` angle slots."""

    scale: float
    pad_to: int

    def __post_init__(self):
        if self.pad_to < 1:
            raise ValueError("pad_to must be >= 1")
        if not np.isfinite(self.scale):
            raise ValueError("scale must be finite")


def encode_amplitude(x: np.ndarray, enc: AmplitudeEncoding) -> StateVector:
    """Embed ``x`` as state amplitudes, padding and normalizing per ``enc``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("feature vector must be 1-D")
    dim = 2**enc.num_qubits
    if x.size > dim:
        raise ValueError(f"{x.size} features do not fit in {dim} amplitudes")
    if x.size < dim and enc.pad_policy == "error":
        raise ValueError(
            f"pad_policy='error' requires exactly {dim} features, got {x.size}"
        )
    padded = np.zeros(dim, dtype=np.float64)
    padded[: x.size] = x
    if not enc.normalize and abs(np.linalg.norm(padded) - 1.0) > 1e-8:
        raise ValueError("normalize=False requires a unit-norm feature vector")
    if enc.normalize and np.linalg.norm(padded) == 0.0:
        raise ValueError("cannot amplitude-encode the zero vector")
    return from_amplitudes(padded, enc.num_qubits, normalize=enc.normalize)


def encode_block(x: np.ndarray, theta: np.ndarray, enc: BlockEncoding) -> np.ndarray:
    """Combined angles ``scale * pad(x) + theta`` for a block-encoded circuit."""
    x = np.asarray(x, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    if x.ndim != 1 or theta.ndim != 1:
        raise ValueError("feature and angle vectors must be 1-D")
    if theta.size != enc.pad_to:
        raise ValueError(
            f"theta has {theta.size} slots, encoding expects {enc.pad_to}"
        )
    if x.size > enc.pad_to:
        raise ValueError(
            f"{x.size} features exceed the {enc.pad_to} available angle slots"
        )
    padded = np.zeros(enc.pad_to, dtype=np.float64)
    padded[: x.size] = x
    return enc.scale * padded + theta


def fix_global_phase(x: np.ndarray, num_ones: int = 1) -> np.ndarray:
    """Append ``num_ones`` constant-1 entries to ``x`` (before normalization).

    Amplitude encoding is blind to a global sign: ``x`` and ``-x`` map to
    physically identical states.  Appending a constant positive component
    breaks that degeneracy so sign-distinguished classes stay separable.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("feature vector must be 1-D")
    if num_ones < 1:
        raise ValueError("num_ones must be >= 1")
    return np.concatenate([x, np.ones(num_ones, dtype=np.float64)])
