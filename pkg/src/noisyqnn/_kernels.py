"""Compiled inner loops on batched Pauli-transfer vectors of shape ``(batch, 4**n)``.

The Pauli digit of qubit ``q`` has stride ``4**(n-1-q)`` in the flat index.
Two-qubit blocks are ordered ``k = 4 * digit_a + digit_b``.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def apply_1q(state, mat, stride):
    """In place ``v -> M v`` on the Pauli digit at ``stride``; ``mat`` is ``(1, 4, 4)`` or ``(batch, 4, 4)``."""
    batch, size = state.shape
    shared = mat.shape[0] == 1
    outer = size // (4 * stride)
    for b in range(batch):
        t = mat[0] if shared else mat[b]
        t00, t01, t02, t03 = t[0, 0], t[0, 1], t[0, 2], t[0, 3]
        t10, t11, t12, t13 = t[1, 0], t[1, 1], t[1, 2], t[1, 3]
        t20, t21, t22, t23 = t[2, 0], t[2, 1], t[2, 2], t[2, 3]
        t30, t31, t32, t33 = t[3, 0], t[3, 1], t[3, 2], t[3, 3]
        row = state[b]
        for o in range(outer):
            for i in range(stride):
                k0 = o * 4 * stride + i
                k1 = k0 + stride
                k2 = k1 + stride
                k3 = k2 + stride
                v0, v1, v2, v3 = row[k0], row[k1], row[k2], row[k3]
                row[k0] = t00 * v0 + t01 * v1 + t02 * v2 + t03 * v3
                row[k1] = t10 * v0 + t11 * v1 + t12 * v2 + t13 * v3
                row[k2] = t20 * v0 + t21 * v1 + t22 * v2 + t23 * v3
                row[k3] = t30 * v0 + t31 * v1 + t32 * v2 + t33 * v3


@numba.njit(cache=True)
def env_1q(w, state, stride):
    """``env[b, o, k] = sum over other digits of w[.., o, ..] * state[.., k, ..]``."""
    batch, size = state.shape
    outer = size // (4 * stride)
    env = np.zeros((batch, 4, 4))
    for b in range(batch):
        for o in range(outer):
            for i in range(stride):
                k0 = o * 4 * stride + i
                for p in range(4):
                    wp = w[b, k0 + p * stride]
                    for q in range(4):
                        env[b, p, q] += wp * state[b, k0 + q * stride]
    return env


@numba.njit(cache=True)
def _pair_offsets(stride_a, stride_b):
    offs = np.empty(16, dtype=np.int64)
    for da in range(4):
        for db in range(4):
            offs[4 * da + db] = da * stride_a + db * stride_b
    return offs


@numba.njit(cache=True)
def rotate_pairs(state, pairs, signs, c, s, stride_a, stride_b):
    """In place, on every two-qubit block: ``(v1, v2) -> (c v1 + sg s v2, c v2 - sg s v1)``.

    ``pairs[j] = (k1, k2)`` are block positions and ``signs[j] = sg``; the
    rest of the block is left unchanged.
    """
    batch, size = state.shape
    hi = max(stride_a, stride_b)
    lo = min(stride_a, stride_b)
    offs = _pair_offsets(stride_a, stride_b)
    n_pairs = pairs.shape[0]
    for b in range(batch):
        row = state[b]
        for o1 in range(size // (4 * hi)):
            for mid in range(hi // (4 * lo)):
                for i in range(lo):
                    base = o1 * 4 * hi + mid * 4 * lo + i
                    for j in range(n_pairs):
                        p1 = base + offs[pairs[j, 0]]
                        p2 = base + offs[pairs[j, 1]]
                        ss = signs[j] * s
                        v1 = row[p1]
                        v2 = row[p2]
                        row[p1] = c * v1 + ss * v2
                        row[p2] = c * v2 - ss * v1


@numba.njit(cache=True)
def env_2q(w, state, stride_a, stride_b):
    """Two-qubit analogue of :func:`env_1q`, shape ``(batch, 16, 16)``."""
    batch, size = state.shape
    hi = max(stride_a, stride_b)
    lo = min(stride_a, stride_b)
    offs = _pair_offsets(stride_a, stride_b)
    env = np.zeros((batch, 16, 16))
    for b in range(batch):
        for o1 in range(size // (4 * hi)):
            for mid in range(hi // (4 * lo)):
                for i in range(lo):
                    base = o1 * 4 * hi + mid * 4 * lo + i
                    for p in range(16):
                        wp = w[b, base + offs[p]]
                        if wp == 0.0:
                            continue
                        for q in range(16):
                            env[b, p, q] += wp * state[b, base + offs[q]]
    return env
