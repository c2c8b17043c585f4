"""The polar transform over F2 and its bit-reversal permutation."""

from __future__ import annotations

import numpy as np


def bit_reversal_permutation(m: int) -> np.ndarray:
    """Permutation of [0, 2^m) sending i to the reversal of its m-bit representation."""
    if m < 0:
        raise ValueError("m must be non-negative")
    n = 1 << m
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for _ in range(m):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def transform_matrix(m: int) -> np.ndarray:
    """Dense n x n transform matrix over F2 (bit-reversal times the m-fold
    Kronecker power of [[1,0],[1,1]]).  For tests and small-n oracles only."""
    g = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    gm = np.array([[1]], dtype=np.uint8)
    for _ in range(m):
        gm = np.kron(gm, g)
    perm = bit_reversal_permutation(m)
    return gm[perm]  # row i of the product is row rev(i) of the Kronecker power


def apply_transform(v: np.ndarray) -> np.ndarray:
    """Multiply bit vector(s) by the transform matrix in O(n log n) bit operations.

    Accepts shape (..., n) with n a power of two; the transform is applied
    along the last axis.  The transform is linear over F2 and is its own
    inverse, so this function also decodes x back to v.
    """
    v = np.asarray(v)
    n = v.shape[-1]
    if n == 0 or (n & (n - 1)) != 0:
        raise ValueError(f"length must be a power of two, got {n}")
    m = n.bit_length() - 1
    x = np.ascontiguousarray(v[..., bit_reversal_permutation(m)]).astype(np.uint8)
    if x.size == 0:
        return x.reshape(v.shape)
    lead = x.shape[:-1]
    half = n // 2
    while half >= 1:
        blocks = x.reshape(lead + (-1, 2 * half))
        blocks[..., :half] ^= blocks[..., half:]
        half //= 2
    return x.reshape(v.shape)
