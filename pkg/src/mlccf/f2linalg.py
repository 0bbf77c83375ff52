"""Dense linear algebra over F2 and arithmetic in GF(4).

Binary matrices and vectors are plain ``numpy`` arrays of dtype ``uint8``
holding 0/1 entries. All functions return fresh arrays and never modify
their inputs.

GF(4) elements are the integers 0..3 under the bit encoding
``(b1, b2) -> b1*w + b2`` with ``w**2 = w + 1`` (polynomial x^2 + x + 1),
so 0 -> 0, 1 -> 1, 2 -> w, 3 -> w^2.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

MAX_GL_ELL = 4

# multiplication table for GF(4) under the encoding above
_GF4_MUL = np.array(
    [
        [0, 0, 0, 0],
        [0, 1, 2, 3],
        [0, 2, 3, 1],
        [0, 3, 1, 2],
    ],
    dtype=np.uint8,
)
_GF4_INV = {1: 1, 2: 3, 3: 2}

W = 2
W2 = 3


class UnsupportedSizeError(ValueError):
    """Raised when an enumeration or search would exceed the supported size."""


def as_bits(a) -> np.ndarray:
    """Coerce array-like 0/1 data to a uint8 array, rejecting other values."""
    arr = np.asarray(a)
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ValueError("binary array must contain only 0 and 1")
    return arr.astype(np.uint8)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.uint8)


def matmul_f2(a, b) -> np.ndarray:
    """Matrix product over F2. Works for matrix-vector products too."""
    a = as_bits(a)
    b = as_bits(b)
    if a.ndim != 2 or b.ndim not in (1, 2) or a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    # int64 accumulation; entries are at most the inner dimension
    return ((a.astype(np.int64) @ b.astype(np.int64)) & 1).astype(np.uint8)


def rank_f2(m) -> int:
    """Rank over F2 by Gaussian elimination."""
    work = as_bits(m).copy()
    if work.ndim != 2:
        raise ValueError("rank_f2 expects a 2-D array")
    rows, cols = work.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        pivots = np.nonzero(work[rank:, col])[0]
        if pivots.size == 0:
            continue
        p = rank + pivots[0]
        if p != rank:
            work[[rank, p]] = work[[p, rank]]
        hits = np.nonzero(work[:, col])[0]
        for r in hits:
            if r != rank:
                work[r] ^= work[rank]
        rank += 1
    return rank


def invert_f2(m) -> Optional[np.ndarray]:
    """Inverse over F2, or ``None`` when the matrix is singular.

    Singularity is an expected outcome (callers filter on it), so it is
    reported as a value. A non-square input is a caller bug and raises.
    """
    m = as_bits(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"invert_f2 needs a square matrix, got shape {m.shape}")
    n = m.shape[0]
    aug = np.concatenate([m, identity(n)], axis=1)
    for col in range(n):
        pivots = np.nonzero(aug[col:, col])[0]
        if pivots.size == 0:
            return None
        p = col + pivots[0]
        if p != col:
            aug[[col, p]] = aug[[p, col]]
        for r in np.nonzero(aug[:, col])[0]:
            if r != col:
                aug[r] ^= aug[col]
    return aug[:, n:].copy()


def solve_left_f2(g, x) -> Optional[np.ndarray]:
    """Solve ``u @ g = x`` over F2 for ``u``.

    ``x`` may be a single row (length n) or a matrix whose rows are solved
    independently. Returns ``None`` if some row of ``x`` is not in the row
    space of ``g``. When ``g`` has full row rank the solution is unique.
    """
    g = as_bits(g)
    x = as_bits(x)
    single = x.ndim == 1
    xs = x[None, :] if single else x
    k, n = g.shape
    if xs.shape[1] != n:
        raise ValueError(f"dimension mismatch: rows of length {xs.shape[1]} vs code length {n}")
    # eliminate on [g | I_k]; row ops keep track of the combination of g's rows
    aug = np.concatenate([g, identity(k)], axis=1)
    pivot_cols = []
    r = 0
    for col in range(n):
        if r == k:
            break
        hits = np.nonzero(aug[r:, col])[0]
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            aug[[r, p]] = aug[[p, r]]
        for rr in np.nonzero(aug[:, col])[0]:
            if rr != r:
                aug[rr] ^= aug[r]
        pivot_cols.append(col)
        r += 1
    reduced, combo = aug[:r, :n], aug[:r, n:]
    out = np.zeros((xs.shape[0], k), dtype=np.uint8)
    for i, row in enumerate(xs):
        residual = row.copy()
        u = np.zeros(k, dtype=np.uint8)
        for j, col in enumerate(pivot_cols):
            if residual[col]:
                residual ^= reduced[j]
                u ^= combo[j]
        if residual.any():
            return None
        out[i] = u
    return out[0] if single else out


def nullspace_f2(m) -> np.ndarray:
    """Basis of the right null space ``{v : m @ v = 0}``, one vector per row."""
    m = as_bits(m)
    rows, cols = m.shape
    rref = m.copy()
    pivots = []
    r = 0
    for col in range(cols):
        if r == rows:
            break
        hits = np.nonzero(rref[r:, col])[0]
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            rref[[r, p]] = rref[[p, r]]
        for rr in np.nonzero(rref[:, col])[0]:
            if rr != r:
                rref[rr] ^= rref[r]
        pivots.append(col)
        r += 1
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for i, fc in enumerate(free):
        basis[i, fc] = 1
        for j, pc in enumerate(pivots):
            basis[i, pc] = rref[j, fc]
    return basis


def int_to_bits(value: int, width: int) -> np.ndarray:
    """MSB-first bit vector of ``value``."""
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def bits_to_int(bits) -> int:
    out = 0
    for b in np.asarray(bits).ravel():
        out = (out << 1) | int(b)
    return out


def all_vectors(width: int) -> np.ndarray:
    """All 2**width binary vectors as rows, row i being the MSB-first bits of i."""
    idx = np.arange(2**width)
    shifts = np.arange(width - 1, -1, -1)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=None)
def _gl_cached(ell: int) -> tuple:
    cells = ell * ell
    candidates = all_vectors(cells).reshape(-1, ell, ell)
    found = []
    for m in candidates:
        if rank_f2(m) == ell:
            found.append(_readonly(m.copy()))
    return tuple(found)


def enumerate_gl(ell: int) -> list:
    """All invertible ell x ell binary matrices.

    Ordered lexicographically by the row-major bit string. Supported for
    ``1 <= ell <= 4``; the returned arrays are read-only.
    """
    if ell < 1:
        raise ValueError("ell must be positive")
    if ell > MAX_GL_ELL:
        raise UnsupportedSizeError(f"enumerate_gl supports ell <= {MAX_GL_ELL}, got {ell}")
    return list(_gl_cached(ell))


def gl_order(ell: int) -> int:
    """Order of GL(ell, 2), from the closed-form product."""
    out = 1
    for i in range(ell):
        out *= 2**ell - 2**i
    return out


def gf4_add(a: int, b: int) -> int:
    return int(a) ^ int(b)


def gf4_mul(a: int, b: int) -> int:
    """Product in GF(4)."""
    _check_gf4(a)
    _check_gf4(b)
    return int(_GF4_MUL[a, b])


def gf4_inv(a: int) -> int:
    _check_gf4(a)
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(4)")
    return _GF4_INV[a]


def gf4_bits(a: int) -> np.ndarray:
    """Bit vector (b1, b2) of a GF(4) element."""
    _check_gf4(a)
    return int_to_bits(a, 2)


def gf4_scale_as_f2matrix(a: int) -> np.ndarray:
    """2x2 binary matrix M with ``M @ bits(x) == bits(a*x)`` for all x."""
    _check_gf4(a)
    if a == 0:
        raise ValueError("zero scaling has no invertible matrix form")
    # column j is the image of the j-th unit vector: bits (1,0) = w, (0,1) = 1
    cols = [gf4_bits(gf4_mul(a, W)), gf4_bits(gf4_mul(a, 1))]
    return np.stack(cols, axis=1)


def _check_gf4(a) -> None:
    if int(a) not in (0, 1, 2, 3) or int(a) != a:
        raise ValueError(f"not a GF(4) element: {a!r}")


def enumerate_partitions(ground: Sequence[int]) -> list:
    """All set partitions of ``ground`` into non-empty blocks.

    Generated from restricted growth strings, so the order is deterministic.
    Each partition is a tuple of blocks and each block a sorted tuple; blocks
    are ordered by their smallest element.
    """
    items = sorted(set(ground))
    if not items:
        raise ValueError("cannot partition an empty set")
    if len(items) != len(list(ground)):
        raise ValueError("ground set has repeated elements")
    out = []

    def grow(pos: int, labels: list, nblocks: int) -> None:
        if pos == len(items):
            blocks = [[] for _ in range(nblocks)]
            for item, lab in zip(items, labels):
                blocks[lab].append(item)
            out.append(tuple(tuple(b) for b in blocks))
            return
        for lab in range(nblocks + 1):
            labels.append(lab)
            grow(pos + 1, labels, max(nblocks, lab + 1))
            labels.pop()

    grow(0, [], 0)
    return out


def bell_number(n: int) -> int:
    """Bell number via the Bell triangle."""
    if n < 0:
        raise ValueError("n must be non-negative")
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]
