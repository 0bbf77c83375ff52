"""Relay decoding functions.

The adaptive class holds every map ``(x_a, x_b) -> D_a x_a + D_b x_b`` over
F2 with both ``D_a`` and ``D_b`` invertible. The GF(4) baseline holds the
maps ``alpha*x_a + beta*x_b`` with non-zero ``alpha``, ``beta``; each one
embeds into the adaptive class for ell = 2.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterator, Union

import numpy as np

from . import f2linalg as f2

MAX_MATERIALIZED_ELL = 3


@dataclass(frozen=True, eq=False)
class DecodingFunction:
    """The pair ``(D_a, D_b)``; equality and hashing go by the matrices."""

    d_a: np.ndarray
    d_b: np.ndarray
    name: str = ""

    def __post_init__(self):
        d_a = f2.as_bits(self.d_a).copy()
        d_b = f2.as_bits(self.d_b).copy()
        if d_a.ndim != 2 or d_a.shape[0] != d_a.shape[1] or d_a.shape != d_b.shape:
            raise ValueError(f"need two square matrices of equal size, got {d_a.shape}, {d_b.shape}")
        for m in (d_a, d_b):
            m.setflags(write=False)
        object.__setattr__(self, "d_a", d_a)
        object.__setattr__(self, "d_b", d_b)

    @property
    def ell(self) -> int:
        return self.d_a.shape[0]

    def is_valid(self) -> bool:
        """True when both matrices are invertible, i.e. the pair is in the class."""
        return f2.invert_f2(self.d_a) is not None and f2.invert_f2(self.d_b) is not None

    @property
    def key(self) -> tuple:
        return (self.d_a.tobytes(), self.d_b.tobytes(), self.ell)

    def __eq__(self, other):
        if not isinstance(other, DecodingFunction):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"DecodingFunction({self.hex_id}{label})"

    @property
    def hex_id(self) -> str:
        """Row-major hex of ``D_a`` and ``D_b`` joined by ``|``."""
        width = -(-self.ell * self.ell // 4)
        return "|".join(format(f2.bits_to_int(m), f"0{width}x") for m in (self.d_a, self.d_b))

    @cached_property
    def table(self) -> np.ndarray:
        """``table[a, b]`` is the integer label of ``f(a, b)``."""
        vecs = f2.all_vectors(self.ell)
        ya = f2.matmul_f2(self.d_a, vecs.T).T
        yb = f2.matmul_f2(self.d_b, vecs.T).T
        weights = 1 << np.arange(self.ell - 1, -1, -1)
        ia = ya.astype(np.int64) @ weights
        ib = yb.astype(np.int64) @ weights
        out = ia[:, None] ^ ib[None, :]
        out.setflags(write=False)
        return out


@dataclass(frozen=True)
class GF4Function:
    """``alpha * x_a + beta * x_b`` over GF(4)."""

    alpha: int
    beta: int

    def __post_init__(self):
        for v in (self.alpha, self.beta):
            if v not in (1, 2, 3):
                raise ValueError(f"GF(4) coefficients must be non-zero field elements, got {v!r}")

    def __call__(self, a: int, b: int) -> int:
        return f2.gf4_add(f2.gf4_mul(self.alpha, a), f2.gf4_mul(self.beta, b))

    @property
    def hex_id(self) -> str:
        names = {1: "1", 2: "w", 3: "w2"}
        return f"gf4:{names[self.alpha]}*a+{names[self.beta]}*b"


def apply(f: DecodingFunction, x_a, x_b) -> np.ndarray:
    """``D_a x_a + D_b x_b`` over F2 (vectors, or matrices acting column-wise)."""
    x_a = f2.as_bits(x_a)
    x_b = f2.as_bits(x_b)
    if x_a.shape != x_b.shape or x_a.shape[0] != f.ell:
        raise ValueError(f"label shapes {x_a.shape}, {x_b.shape} do not match ell={f.ell}")
    return f2.matmul_f2(f.d_a, x_a) ^ f2.matmul_f2(f.d_b, x_b)


def solve_for_partner(f: DecodingFunction, x_r, x_own, side: str) -> np.ndarray:
    """Recover the partner's label from the function value and one's own label.

    ``side`` is the node doing the recovery: "A" knows ``x_a`` and returns
    ``x_b``, and vice versa.
    """
    side = side.upper()
    if side == "A":
        own, partner = f.d_a, f.d_b
    elif side == "B":
        own, partner = f.d_b, f.d_a
    else:
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    inv = f2.invert_f2(partner)
    if inv is None:
        raise ValueError("partner matrix is singular; function is not in the class")
    return f2.matmul_f2(inv, f2.as_bits(x_r) ^ f2.matmul_f2(own, x_own))


def iter_functions(ell: int) -> Iterator[DecodingFunction]:
    """Lazily yield the adaptive class in ``(D_a, D_b)`` lexicographic order."""
    gl = f2.enumerate_gl(ell)
    for d_a, d_b in itertools.product(gl, gl):
        yield DecodingFunction(d_a, d_b)


def enumerate_F(ell: int) -> list:
    """All ``|GL(ell,2)|**2`` decoding functions as a list (ell <= 3).

    ell = 4 has about 4e8 members; use :func:`iter_functions` for it.
    """
    if ell > MAX_MATERIALIZED_ELL:
        raise f2.UnsupportedSizeError(
            f"the class is only materialized for ell <= {MAX_MATERIALIZED_ELL}; use iter_functions"
        )
    return list(iter_functions(ell))


def enumerate_gf4() -> list:
    return [GF4Function(a, b) for a in (1, 2, 3) for b in (1, 2, 3)]


def gf4_as_decoding_function(g: GF4Function) -> DecodingFunction:
    return DecodingFunction(
        f2.gf4_scale_as_f2matrix(g.alpha), f2.gf4_scale_as_f2matrix(g.beta), name=g.hex_id
    )


def xor_function(ell: int) -> DecodingFunction:
    eye = f2.identity(ell)
    return DecodingFunction(eye, eye, name="xor")


def swap_function() -> DecodingFunction:
    """The cross-level map ``(x_a^1 + x_b^2, x_a^2 + x_b^1)`` for ell = 2."""
    return DecodingFunction(f2.identity(2), np.array([[0, 1], [1, 0]]), name="swap")


def label_table(fmap: Union[DecodingFunction, GF4Function, Callable, np.ndarray], ell: int = None) -> np.ndarray:
    """Tabulate any label map F2^ell x F2^ell -> F2^ell as integer labels.

    Callables receive and return integer labels.
    """
    if isinstance(fmap, DecodingFunction):
        return np.asarray(fmap.table)
    if isinstance(fmap, np.ndarray):
        return fmap
    if isinstance(fmap, GF4Function):
        ell = 2
    if ell is None:
        raise ValueError("ell is required to tabulate a plain callable")
    q = 2**ell
    return np.array([[int(fmap(a, b)) for b in range(q)] for a in range(q)], dtype=np.int64)


def is_unambiguous(fmap, ell: int = None) -> bool:
    """Each node can recover the other's label from the value and its own label.

    Equivalent to every row and every column of the value table being a
    permutation (injective in each argument with the other held fixed).
    """
    t = label_table(fmap, ell)
    q = t.shape[0]
    if t.shape != (q, q):
        raise ValueError("label table must be square")
    rows = np.sort(t, axis=1)
    cols = np.sort(t, axis=0)
    return bool(np.all(rows[:, 1:] != rows[:, :-1]) and np.all(cols[1:] != cols[:-1]))
