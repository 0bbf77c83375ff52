"""Conditional mutual information for the relay's Gaussian-mixture channel.

Every bound term has the form ``I(Y; M | C)`` where the relay observes
``Y = mu + W`` for a uniformly drawn label pair, ``M`` is the target bits of
the function value and ``C`` the conditioning information. With uniform
pairs the term is

    I = sum_c P(c) h(Y | c) - sum_{c,m} P(c, m) h(Y | c, m),

a difference of differential entropies of equal-weight complex Gaussian
mixtures. The reference path integrates those entropies on a 2-D
trapezoidal grid; a Monte Carlo estimator serves as an independent check.

Levels are numbered 1..ell, level 1 being the most significant label bit.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .f2linalg import enumerate_partitions
from .functions import DecodingFunction
from .modulation import RelayConstellation

NEGATIVE_MI_TOL = 1e-9
CENTER_DECIMALS = 12


class ConvergenceWarning(UserWarning):
    """The grid result moved by more than the tolerance when resolution was halved."""


class IntegrationError(ArithmeticError):
    """A mutual-information estimate came out clearly negative."""


@dataclass(frozen=True)
class QuadratureConfig:
    """Tensor-product trapezoidal grid settings.

    ``points`` per axis over a square covering every mixture mean
    ``+- extent`` noise standard deviations (per real dimension). Each term is
    also evaluated on the every-other-point subgrid; a difference above
    ``tol`` bits raises a :class:`ConvergenceWarning` when ``check`` is set.
    """

    points: int = 401
    extent: float = 8.0
    tol: float = 1e-3
    check: bool = True

    def __post_init__(self):
        if self.points < 3:
            raise ValueError("grid needs at least 3 points per axis")
        if not self.extent > 0:
            raise ValueError("grid extent must be positive")


@dataclass(frozen=True)
class ConditioningSpec:
    """One choice of revealed levels and a partition of the remaining ones.

    ``blocks`` partition the target set; each block shares one uniform mask
    bit, so only within-block XOR differences are revealed by it.
    """

    revealed: tuple
    blocks: tuple

    def __post_init__(self):
        revealed = tuple(sorted(int(k) for k in self.revealed))
        blocks = tuple(sorted(tuple(sorted(int(k) for k in b)) for b in self.blocks))
        if not blocks:
            raise ValueError("target set must be non-empty")
        if any(len(b) == 0 for b in blocks):
            raise ValueError("blocks must be non-empty")
        flat = [k for b in blocks for k in b]
        if len(set(flat)) != len(flat):
            raise ValueError("blocks must be disjoint")
        if set(flat) & set(revealed):
            raise ValueError("revealed levels overlap the target")
        object.__setattr__(self, "revealed", revealed)
        object.__setattr__(self, "blocks", blocks)

    @property
    def target(self) -> tuple:
        return tuple(sorted(k for b in self.blocks for k in b))

    @property
    def p(self) -> int:
        return len(self.blocks)

    @property
    def ell(self) -> int:
        return len(self.revealed) + len(self.target)

    def check_levels(self, ell: int) -> None:
        if set(self.revealed) | set(self.target) != set(range(1, ell + 1)):
            raise ValueError(f"{self} does not cover levels 1..{ell}")

    def describe(self) -> str:
        s = ",".join(map(str, self.target))
        sbar = ",".join(map(str, self.revealed)) or "-"
        parts = "/".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks)
        return f"S={{{s}}} Sbar={{{sbar}}} blocks={parts}"


def enumerate_specs(ell: int) -> list:
    """Every (target subset, partition) pair, ordered by target bitmask then partition."""
    out = []
    levels = range(1, ell + 1)
    for mask in range(1, 2**ell):
        target = [k for k in levels if mask >> (k - 1) & 1]
        revealed = tuple(k for k in levels if k not in target)
        for part in enumerate_partitions(target):
            out.append(ConditioningSpec(revealed, part))
    return out


@dataclass(frozen=True, eq=False)
class LabeledMixture:
    """Equally likely entries, each a mean with a conditioning and a message code.

    ``max_bits`` is the entropy ceiling of the message, used to clamp results.
    """

    means: np.ndarray
    cond: np.ndarray
    msg: np.ndarray
    max_bits: float

    def __post_init__(self):
        means = np.asarray(self.means, dtype=complex).ravel()
        cond = _codes(self.cond)
        msg = _codes(self.msg)
        if not (means.size == cond.size == msg.size) or means.size == 0:
            raise ValueError("means, cond and msg must be non-empty and equally long")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "cond", cond)
        object.__setattr__(self, "msg", msg)

    def __len__(self) -> int:
        return self.means.size

    def groups(self) -> dict:
        """``{cond_code: {msg_code: entry indices}}``."""
        out: dict = {}
        for i, (c, m) in enumerate(zip(self.cond.tolist(), self.msg.tolist())):
            out.setdefault(c, {}).setdefault(m, []).append(i)
        return out


def _codes(values) -> np.ndarray:
    """Map arbitrary hashable labels (tuples, ints) to dense int codes."""
    values = list(values) if not isinstance(values, np.ndarray) else values
    if isinstance(values, np.ndarray) and values.dtype.kind in "iu" and values.ndim == 1:
        return values.astype(np.int64)
    lookup: dict = {}
    return np.array([lookup.setdefault(v, len(lookup)) for v in map(_hashable, values)], dtype=np.int64)


def _hashable(v):
    if isinstance(v, np.ndarray):
        return tuple(v.tolist())
    return v


def _level_bits(labels: np.ndarray, ell: int) -> np.ndarray:
    """``out[:, k-1]`` is level k of each integer label."""
    shifts = ell - np.arange(1, ell + 1)
    return (labels[:, None] >> shifts) & 1


def _pack(bits: np.ndarray) -> np.ndarray:
    """Pack columns of a 0/1 matrix into one integer code per row."""
    out = np.zeros(bits.shape[0], dtype=np.int64)
    for j in range(bits.shape[1]):
        out = (out << 1) | bits[:, j]
    return out


def build_mixture(rc: RelayConstellation, f: DecodingFunction, spec: ConditioningSpec) -> LabeledMixture:
    """Mixture for one bound term with the mask variables reduced away.

    Conditioning on ``{x^k + Z_i : k in block i}`` with a uniform independent
    ``Z_i`` reveals exactly the XOR differences inside the block; singleton
    blocks reveal nothing.
    """
    if f.ell != rc.ell:
        raise ValueError(f"function ell={f.ell} does not match relay constellation ell={rc.ell}")
    spec.check_levels(rc.ell)
    x_r = np.asarray(f.table)[rc.label_a, rc.label_b]
    bits = _level_bits(x_r, rc.ell)
    cond_cols = [bits[:, k - 1] for k in spec.revealed]
    for block in spec.blocks:
        lead = bits[:, block[0] - 1]
        cond_cols.extend(bits[:, k - 1] ^ lead for k in block[1:])
    cond = _pack(np.stack(cond_cols, axis=1)) if cond_cols else np.zeros(x_r.size, dtype=np.int64)
    msg = _pack(bits[:, [k - 1 for k in spec.target]])
    return LabeledMixture(rc.points, cond, msg, float(len(spec.target)))


def build_mixture_explicit_masks(rc: RelayConstellation, f: DecodingFunction, spec: ConditioningSpec) -> LabeledMixture:
    """Same term with the mask bits kept as explicit random variables.

    The probability space is enlarged to (label pair, Z_1..Z_p) and the
    conditioning value is the literal tuple of revealed bits and masked bits
    ``x^k + Z_i``. Used to check the reduction in :func:`build_mixture`.
    """
    spec.check_levels(rc.ell)
    x_r = np.asarray(f.table)[rc.label_a, rc.label_b]
    bits = _level_bits(x_r, rc.ell)
    p = spec.p
    means, cond, msg = [], [], []
    for z in range(2**p):
        zbits = [(z >> (p - 1 - i)) & 1 for i in range(p)]
        for i in range(x_r.size):
            row = bits[i]
            revealed = tuple(int(row[k - 1]) for k in spec.revealed)
            masked = tuple(int(row[k - 1]) ^ zbits[bi] for bi, b in enumerate(spec.blocks) for k in b)
            means.append(rc.points[i])
            cond.append(revealed + masked)
            msg.append(tuple(int(row[k - 1]) for k in spec.target))
    return LabeledMixture(np.array(means), cond, msg, float(len(spec.target)))


def _trapezoid_weights(n: int, step: float) -> np.ndarray:
    w = np.full(n, step)
    w[0] = w[-1] = step / 2
    return w


class MixtureGrid:
    """Evaluates entropies of Gaussian mixtures over a fixed set of centers.

    The complex Gaussian kernel factors into real and imaginary parts, so a
    mixture density on the grid is ``gx.T @ diag(w) @ gy``. Entropies are
    cached per weight vector, which lets one grid serve every bound of every
    decoding function at a channel state.
    """

    def __init__(self, centers: Sequence[complex], n0: float, cfg: QuadratureConfig = QuadratureConfig()):
        if not n0 > 0:
            raise ValueError(f"n0 must be positive, got {n0!r}")
        self.n0 = float(n0)
        self.cfg = cfg
        centers = np.asarray(centers, dtype=complex).ravel()
        keys = np.round(centers, CENTER_DECIMALS)
        self.centers, self._inverse = np.unique(keys, return_inverse=True)
        self._index = {complex(c): i for i, c in enumerate(self.centers)}

        sigma = math.sqrt(self.n0 / 2)
        re, im = self.centers.real, self.centers.imag
        mid_re, mid_im = (re.min() + re.max()) / 2, (im.min() + im.max()) / 2
        half = max(np.ptp(re), np.ptp(im)) / 2 + cfg.extent * sigma
        n = cfg.points
        self.x = np.linspace(mid_re - half, mid_re + half, n)
        self.y = np.linspace(mid_im - half, mid_im + half, n)
        step = 2 * half / (n - 1)
        # trapezoid sums of a Gaussian are only trustworthy once the step is below sigma
        self.resolved = step <= sigma
        self._wx = _trapezoid_weights(n, step)
        self._wy = _trapezoid_weights(n, step)
        sub = slice(None, None, 2)
        nsub = len(self.x[sub])
        self._wx_half = _trapezoid_weights(nsub, 2 * step)
        self._wy_half = _trapezoid_weights(nsub, 2 * step)
        norm = 1 / math.sqrt(math.pi * self.n0)
        self._gx = norm * np.exp(-((self.x[None, :] - re[:, None]) ** 2) / self.n0)
        self._gy = norm * np.exp(-((self.y[None, :] - im[:, None]) ** 2) / self.n0)
        self._cache: dict = {}

    def center_indices(self, means: np.ndarray) -> np.ndarray:
        keys = np.round(np.asarray(means, dtype=complex), CENTER_DECIMALS)
        try:
            return np.array([self._index[complex(k)] for k in keys], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"mean {exc.args[0]!r} is not a center of this grid") from None

    def density(self, weights: np.ndarray) -> np.ndarray:
        """Mixture density on the full grid, shape (points, points)."""
        return (self._gx.T * weights) @ self._gy

    def entropy(self, weights: np.ndarray) -> tuple:
        """Differential entropy in bits on the full grid and on the half-resolution subgrid."""
        weights = np.asarray(weights, dtype=float)
        key = weights.tobytes()
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        dens = self.density(weights)
        full = _grid_entropy(dens, self._wx, self._wy)
        half = _grid_entropy(dens[::2, ::2], self._wx_half, self._wy_half)
        self._cache[key] = (full, half)
        return full, half

    def group_entropy(self, center_idx: np.ndarray) -> tuple:
        counts = np.bincount(center_idx, minlength=self.centers.size).astype(float)
        return self.entropy(counts / counts.sum())

    def mutual_information(self, mix: LabeledMixture) -> tuple:
        """Raw (unclamped) ``I(Y; msg | cond)`` on the full and half grids."""
        idx = self.center_indices(mix.means)
        total = len(mix)
        acc = np.zeros(2)
        for members in mix.groups().values():
            everyone = np.concatenate([np.asarray(v) for v in members.values()])
            acc += len(everyone) / total * np.array(self.group_entropy(idx[everyone]))
            for entries in members.values():
                acc -= len(entries) / total * np.array(self.group_entropy(idx[np.asarray(entries)]))
        return float(acc[0]), float(acc[1])


def _grid_entropy(dens: np.ndarray, wx: np.ndarray, wy: np.ndarray) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(dens > 0, dens * np.log2(np.where(dens > 0, dens, 1.0)), 0.0)
    return float(-(wx @ plogp @ wy))


def finalize_mi(value: float, max_bits: float) -> float:
    """Clamp round-off into ``[0, max_bits]``; reject clearly negative values."""
    if value < -NEGATIVE_MI_TOL:
        raise IntegrationError(f"mutual information came out negative: {value!r}")
    return min(max(value, 0.0), max_bits)


def conditional_mi_quadrature(
    mix: LabeledMixture,
    n0: float,
    grid: QuadratureConfig = QuadratureConfig(),
    engine: MixtureGrid = None,
) -> float:
    """``I(Y; msg | cond)`` in bits per symbol by grid integration.

    Pass ``engine`` to share a :class:`MixtureGrid` (and its entropy cache)
    across terms that use the same centers and noise level.
    """
    if not n0 > 0:
        raise ValueError(f"n0 must be positive, got {n0!r}")
    if engine is None:
        engine = MixtureGrid(mix.means, n0, grid)
    elif engine.n0 != n0:
        raise ValueError("engine was built for a different noise level")
    full, half = engine.mutual_information(mix)
    cfg = engine.cfg
    if cfg.check and not engine.resolved:
        warnings.warn(
            f"grid step is wider than the noise standard deviation (points={cfg.points}, n0={n0:g})",
            ConvergenceWarning,
            stacklevel=2,
        )
    elif cfg.check and abs(full - half) > cfg.tol:
        warnings.warn(
            f"quadrature not converged: {full:.6f} vs {half:.6f} bits at half resolution "
            f"(points={cfg.points}, n0={n0:g})",
            ConvergenceWarning,
            stacklevel=2,
        )
    return finalize_mi(full, mix.max_bits)


def conditional_mi_montecarlo(mix: LabeledMixture, n0: float, samples: int, rng: np.random.Generator) -> tuple:
    """Sampled estimate of ``I(Y; msg | cond)`` and its standard error, in bits.

    Uses ``H(msg | cond) - E[H(msg | y, cond)]``: the first term is exact
    from label counts, the second averages the posterior entropy of the
    message over draws of (entry, noise). The posterior entropy is bounded
    and smooth in ``y``, so it has far less variance than the plain
    log-likelihood ratio when the channel is nearly noiseless.
    """
    if samples < 10_000:
        raise ValueError("use at least 10^4 samples")
    if not n0 > 0:
        raise ValueError(f"n0 must be positive, got {n0!r}")
    k = len(mix)
    entry = rng.integers(k, size=samples)
    sigma = math.sqrt(n0 / 2)
    y = mix.means[entry] + sigma * (rng.standard_normal(samples) + 1j * rng.standard_normal(samples))
    # log-kernel up to a constant that cancels in the posterior
    logk = -np.abs(y[:, None] - mix.means[None, :]) ** 2 / n0
    h_post = np.empty(samples)
    h_prior = 0.0
    for c, members in mix.groups().items():
        sizes = np.array([len(v) for v in members.values()], dtype=float)
        p_m = sizes / sizes.sum()
        h_prior += sizes.sum() / k * -(p_m * np.log2(p_m)).sum()
        in_c = mix.cond[entry] == c
        rows = logk[in_c]
        log_m = np.stack([logsumexp(rows[:, np.asarray(v)], axis=1) for v in members.values()], axis=1)
        log_post = log_m - logsumexp(log_m, axis=1, keepdims=True)
        h_post[in_c] = -(np.exp(log_post) * log_post).sum(axis=1) / math.log(2)
    return float(h_prior - h_post.mean()), float(h_post.std(ddof=1) / math.sqrt(samples))


def mixture_entropy_quadrature(means: Sequence[complex], n0: float, cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """Differential entropy (bits) of an equal-weight complex Gaussian mixture."""
    g = MixtureGrid(means, n0, cfg)
    return g.group_entropy(g.center_indices(np.asarray(means, dtype=complex)))[0]
