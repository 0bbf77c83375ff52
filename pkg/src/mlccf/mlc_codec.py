"""Desk-scale multilevel coset codec for the multiple-access stage.

Each node splits its message into ``ell`` rows ``U`` (ell x k), encodes every
row with the same binary linear code ``G`` (k x n) and adds a per-node coset
matrix: ``X = U G + Lambda``. Column ``n`` of ``X`` is the label of symbol
``n``. For any decoding function ``(D_a, D_b)`` the relay's target
``X_R = D_a X_a + D_b X_b`` equals ``U_R G + Lambda_R`` with
``U_R = D_a U_a + D_b U_b`` and ``Lambda_R = D_a Lambda_a + D_b Lambda_b``,
so it is again a codeword of a coset of the same code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import f2linalg as f2
from .f2linalg import UnsupportedSizeError
from .functions import DecodingFunction
from .modulation import ChannelState, Constellation, relay_constellation

MAX_SEARCH_BITS = 16


class DecodingFailure(Exception):
    """The relay output is not a codeword of the expected coset code."""


@dataclass(frozen=True, eq=False)
class LinearCode:
    g: np.ndarray

    def __post_init__(self):
        g = f2.as_bits(self.g).copy()
        if g.ndim != 2:
            raise ValueError("generator must be a matrix")
        if f2.rank_f2(g) != g.shape[0]:
            raise ValueError("generator matrix must have full row rank")
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    @property
    def k(self) -> int:
        return self.g.shape[0]

    @property
    def n(self) -> int:
        return self.g.shape[1]

    @property
    def rate(self) -> float:
        return self.k / self.n

    @classmethod
    def random(cls, k: int, n: int, rng: np.random.Generator) -> "LinearCode":
        """Uniformly random full-rank k x n generator (rejection sampling)."""
        if not 0 < k <= n:
            raise ValueError("need 0 < k <= n")
        while True:
            g = rng.integers(0, 2, size=(k, n), dtype=np.uint8)
            if f2.rank_f2(g) == k:
                return cls(g)

    def parity_check(self) -> np.ndarray:
        """Rows span the dual code, so ``c`` is a codeword iff ``H @ c == 0``."""
        return f2.nullspace_f2(self.g)

    def contains(self, words) -> np.ndarray:
        """Membership of each row of ``words`` in the code."""
        words = np.atleast_2d(f2.as_bits(words))
        h = self.parity_check()
        if h.shape[0] == 0:
            return np.ones(words.shape[0], dtype=bool)
        return ~f2.matmul_f2(h, words.T).any(axis=0)


@dataclass(frozen=True, eq=False)
class MlcEncoderState:
    code: LinearCode
    ell: int
    coset: np.ndarray

    def __post_init__(self):
        coset = f2.as_bits(self.coset).copy()
        if coset.shape != (self.ell, self.code.n):
            raise ValueError(f"coset must be {self.ell} x {self.code.n}, got {coset.shape}")
        coset.setflags(write=False)
        object.__setattr__(self, "coset", coset)

    @classmethod
    def random(cls, code: LinearCode, ell: int, rng: np.random.Generator) -> "MlcEncoderState":
        return cls(code, ell, rng.integers(0, 2, size=(ell, code.n), dtype=np.uint8))


@dataclass(frozen=True, eq=False)
class InducedCodebook:
    f: DecodingFunction
    effective_coset: np.ndarray
    code: LinearCode

    @classmethod
    def from_encoders(cls, f: DecodingFunction, st_a: MlcEncoderState, st_b: MlcEncoderState) -> "InducedCodebook":
        if st_a.code is not st_b.code and not np.array_equal(st_a.code.g, st_b.code.g):
            raise ValueError("both nodes must use the same linear code")
        coset = f2.matmul_f2(f.d_a, st_a.coset) ^ f2.matmul_f2(f.d_b, st_b.coset)
        return cls(f, coset, st_a.code)

    def codeword(self, u_r) -> np.ndarray:
        return f2.matmul_f2(u_r, self.code.g) ^ self.effective_coset

    def contains(self, x_r) -> bool:
        return bool(self.code.contains(f2.as_bits(x_r) ^ self.effective_coset).all())


def encode(st: MlcEncoderState, u, c: Constellation = None) -> tuple:
    """Return ``(X, symbols)`` with ``X = U G + Lambda``.

    ``symbols`` is empty when no constellation is given.
    """
    u = f2.as_bits(u)
    if u.shape != (st.ell, st.code.k):
        raise ValueError(f"message must be {st.ell} x {st.code.k}, got {u.shape}")
    x = f2.matmul_f2(u, st.code.g) ^ st.coset
    if c is None:
        return x, np.empty(0, dtype=complex)
    if c.ell != st.ell:
        raise ValueError("constellation and encoder disagree on ell")
    return x, c.map_columns(x)


def induced_codeword(f: DecodingFunction, x_a, x_b) -> np.ndarray:
    """``D_a X_a + D_b X_b`` for whole blocks (acts column by column)."""
    x_a, x_b = f2.as_bits(x_a), f2.as_bits(x_b)
    if x_a.shape != x_b.shape or x_a.shape[0] != f.ell:
        raise ValueError(f"block shapes {x_a.shape}, {x_b.shape} do not match ell={f.ell}")
    return f2.matmul_f2(f.d_a, x_a) ^ f2.matmul_f2(f.d_b, x_b)


def effective_message(icb: InducedCodebook, x_r) -> np.ndarray:
    """Solve ``U_R G = X_R + Lambda_R``; raises :class:`DecodingFailure` off the coset."""
    u = f2.solve_left_f2(icb.code.g, f2.as_bits(x_r) ^ icb.effective_coset)
    if u is None:
        raise DecodingFailure("relay word is not in the induced coset code")
    return u


def symbol_label_loglik(y, ch: ChannelState, f: DecodingFunction, c: Constellation) -> np.ndarray:
    """``out[t, r] = log p(y_t | f(x_a, x_b) = r)`` up to a common constant.

    The relay only knows the function value, so each likelihood averages the
    Gaussian kernel over the label pairs that map to ``r``.
    """
    rc = relay_constellation(c, ch)
    y = np.asarray(y, dtype=complex).ravel()
    labels = np.asarray(f.table)[rc.label_a, rc.label_b]
    logk = -np.abs(y[:, None] - rc.points[None, :]) ** 2 / ch.n0
    out = np.empty((y.size, c.size))
    for r in range(c.size):
        members = np.nonzero(labels == r)[0]
        out[:, r] = logsumexp(logk[:, members], axis=1) - math.log(members.size)
    return out


def relay_decode_joint(y, ch: ChannelState, f: DecodingFunction, icb: InducedCodebook, c: Constellation) -> np.ndarray:
    """Exhaustive maximum-likelihood estimate of ``X_R`` over the induced coset code.

    Searches all ``2**(ell*k)`` effective messages; ties resolve to the
    first message in enumeration order.
    """
    ell, k, n = f.ell, icb.code.k, icb.code.n
    if ell * k > MAX_SEARCH_BITS:
        raise UnsupportedSizeError(f"exhaustive search over 2^{ell * k} messages exceeds 2^{MAX_SEARCH_BITS}")
    y = np.asarray(y, dtype=complex).ravel()
    if y.size != n:
        raise ValueError(f"expected {n} observations, got {y.size}")
    ll = symbol_label_loglik(y, ch, f, c)
    messages = f2.all_vectors(ell * k).reshape(-1, ell, k).astype(np.int64)
    words = (messages @ icb.code.g.astype(np.int64) & 1) ^ icb.effective_coset
    weights = 1 << np.arange(ell - 1, -1, -1)
    col_labels = np.einsum("hln,l->hn", words, weights)
    scores = ll[np.arange(n)[None, :], col_labels].sum(axis=1)
    return words[int(np.argmax(scores))].astype(np.uint8)


def destination_decode(
    x_r,
    own_u,
    own_st: MlcEncoderState,
    partner_coset,
    f: DecodingFunction,
    side: str,
) -> np.ndarray:
    """Recover the partner's message from the relay word and one's own message.

    ``side`` names the node doing the decoding ("A" or "B"); the partner's
    coset matrix is public, like the code.
    """
    side = side.upper()
    if side == "A":
        d_own, d_partner = f.d_a, f.d_b
    elif side == "B":
        d_own, d_partner = f.d_b, f.d_a
    else:
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    x_own, _ = encode(own_st, own_u)
    inv = f2.invert_f2(d_partner)
    if inv is None:
        raise ValueError("decoding function is not invertible on the partner side")
    x_partner = f2.matmul_f2(inv, f2.as_bits(x_r) ^ f2.matmul_f2(d_own, x_own))
    u = f2.solve_left_f2(own_st.code.g, x_partner ^ f2.as_bits(partner_coset))
    if u is None:
        raise DecodingFailure("relay word is inconsistent with the partner's coset code")
    return u


def label_collisions(f: DecodingFunction, ch: ChannelState, c: Constellation, tol: float = 1e-9) -> list:
    """Pairs of relay points that coincide but carry different function values."""
    rc = relay_constellation(c, ch)
    labels = np.asarray(f.table)[rc.label_a, rc.label_b]
    out = []
    for i in range(len(rc)):
        for j in range(i + 1, len(rc)):
            if labels[i] != labels[j] and abs(rc.points[i] - rc.points[j]) < tol:
                out.append((i, j))
    return out


@dataclass(frozen=True)
class SimResult:
    trials: int
    block_errors: int
    destination_errors: int

    @property
    def block_error_rate(self) -> float:
        return self.block_errors / self.trials


def simulate(
    c: Constellation,
    ch: ChannelState,
    f: DecodingFunction,
    k: int,
    n: int,
    trials: int,
    rng: np.random.Generator,
) -> SimResult:
    """Monte Carlo of encode, noisy superposition, relay ML decoding and node-A recovery."""
    code = LinearCode.random(k, n, rng)
    st_a = MlcEncoderState.random(code, c.ell, rng)
    st_b = MlcEncoderState.random(code, c.ell, rng)
    icb = InducedCodebook.from_encoders(f, st_a, st_b)
    sigma = math.sqrt(ch.n0 / 2)
    block_errors = dest_errors = 0
    for _ in range(trials):
        u_a = rng.integers(0, 2, size=(c.ell, k), dtype=np.uint8)
        u_b = rng.integers(0, 2, size=(c.ell, k), dtype=np.uint8)
        x_a, s_a = encode(st_a, u_a, c)
        x_b, s_b = encode(st_b, u_b, c)
        y = ch.h_a * s_a + ch.h_b * s_b + sigma * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        x_hat = relay_decode_joint(y, ch, f, icb, c)
        if not np.array_equal(x_hat, induced_codeword(f, x_a, x_b)):
            block_errors += 1
        u_b_hat = destination_decode(x_hat, u_a, st_a, st_b.coset, f, "A")
        if not np.array_equal(u_b_hat, u_b):
            dest_errors += 1
    return SimResult(trials, block_errors, dest_errors)
