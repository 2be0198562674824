"""Numba kernels for batched statevector updates.

All kernels act in place on C-contiguous ``(rows, 2**n)`` complex128 arrays,
one statevector per row.  Bit position ``shift`` counts from the least
significant bit, so qubit ``q`` (1-based, MSB-first) lives at
``shift = n - q``.  Loops are sequential on purpose: this targets single-core
boxes and sequential accumulation keeps results bit-reproducible.

Ensemble layouts: several kernels take ``nb`` and treat row ``r`` as sample
``r % nb`` of variant ``r // nb``.  The gradient engine tiles a batch of
``nb`` states once per shifted-parameter variant and pushes the whole
ensemble through the remaining layers in one pass.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def rot_layer_shared(states, mats, n):
    """Apply one composed 2x2 per qubit, same matrices for every row.

    ``mats`` is ``(n, 2, 2)`` indexed by 0-based qubit (MSB first).
    """
    rows, dim = states.shape
    for b in range(rows):
        row = states[b]
        for q0 in range(n):
            step = 1 << (n - 1 - q0)
            u00 = mats[q0, 0, 0]
            u01 = mats[q0, 0, 1]
            u10 = mats[q0, 1, 0]
            u11 = mats[q0, 1, 1]
            base = 0
            while base < dim:
                for j in range(base, base + step):
                    a0 = row[j]
                    a1 = row[j + step]
                    row[j] = u00 * a0 + u01 * a1
                    row[j + step] = u10 * a0 + u11 * a1
                base += step << 1


@njit(cache=True)
def rot_layer_indexed(states, mats, n, nb):
    """Per-sample rotation layer; row ``r`` uses ``mats[r % nb]`` (B, n, 2, 2)."""
    rows, dim = states.shape
    for b in range(rows):
        row = states[b]
        s = b % nb
        for q0 in range(n):
            step = 1 << (n - 1 - q0)
            u00 = mats[s, q0, 0, 0]
            u01 = mats[s, q0, 0, 1]
            u10 = mats[s, q0, 1, 0]
            u11 = mats[s, q0, 1, 1]
            base = 0
            while base < dim:
                for j in range(base, base + step):
                    a0 = row[j]
                    a1 = row[j + step]
                    row[j] = u00 * a0 + u01 * a1
                    row[j + step] = u10 * a0 + u11 * a1
                base += step << 1


@njit(cache=True)
def fixup_variants_shared(states, shifts, mats, nb):
    """One 2x2 gate per variant: row ``r`` gets ``mats[r // nb]`` at bit
    ``shifts[r // nb]``."""
    rows, dim = states.shape
    for b in range(rows):
        row = states[b]
        v = b // nb
        step = 1 << shifts[v]
        u00 = mats[v, 0, 0]
        u01 = mats[v, 0, 1]
        u10 = mats[v, 1, 0]
        u11 = mats[v, 1, 1]
        base = 0
        while base < dim:
            for j in range(base, base + step):
                a0 = row[j]
                a1 = row[j + step]
                row[j] = u00 * a0 + u01 * a1
                row[j + step] = u10 * a0 + u11 * a1
            base += step << 1


@njit(cache=True)
def fixup_variants_indexed(states, shifts, mats, nb):
    """Like :func:`fixup_variants_shared` with per-sample matrices
    ``mats[v, r % nb]`` of shape (V, B, 2, 2)."""
    rows, dim = states.shape
    for b in range(rows):
        row = states[b]
        v = b // nb
        s = b % nb
        step = 1 << shifts[v]
        u00 = mats[v, s, 0, 0]
        u01 = mats[v, s, 0, 1]
        u10 = mats[v, s, 1, 0]
        u11 = mats[v, s, 1, 1]
        base = 0
        while base < dim:
            for j in range(base, base + step):
                a0 = row[j]
                a1 = row[j + step]
                row[j] = u00 * a0 + u01 * a1
                row[j + step] = u10 * a0 + u11 * a1
            base += step << 1


@njit(cache=True)
def cx_chain(states, n, reps):
    """CNOT chain q -> q+1 for q = 1..n-1, repeated ``reps`` times."""
    rows, dim = states.shape
    quarter = dim >> 2
    for b in range(rows):
        row = states[b]
        for _ in range(reps):
            for c0 in range(n - 1):
                # control bit st+1, target bit st; enumerate control=1,target=0
                st = n - 2 - c0
                tmask = 1 << st
                cmask = tmask << 1
                low = tmask - 1
                for g in range(quarter):
                    i = (((g >> st) << (st + 2)) | (g & low)) | cmask
                    j = i | tmask
                    tmp = row[i]
                    row[i] = row[j]
                    row[j] = tmp


@njit(cache=True)
def cz_chain(states, n):
    """CZ chain q -> q+1 for q = 1..n-1."""
    rows, dim = states.shape
    quarter = dim >> 2
    for b in range(rows):
        row = states[b]
        for c0 in range(n - 1):
            st = n - 2 - c0
            tmask = 1 << st
            cmask = tmask << 1
            low = tmask - 1
            both = cmask | tmask
            for g in range(quarter):
                i = (((g >> st) << (st + 2)) | (g & low)) | both
                row[i] = -row[i]


@njit(cache=True)
def probs_pair(states, shift):
    """(P(0), P(1)) of the qubit at bit ``shift`` for every row."""
    rows, dim = states.shape
    out = np.empty((rows, 2), dtype=np.float64)
    mask = 1 << shift
    for b in range(rows):
        row = states[b]
        p0 = 0.0
        p1 = 0.0
        for i in range(dim):
            c = row[i]
            w = c.real * c.real + c.imag * c.imag
            if i & mask:
                p1 += w
            else:
                p0 += w
        out[b, 0] = p0
        out[b, 1] = p1
    return out
