"""Achievable rates for a decoding function, the best function, and universal rates.

All rates returned here are in bits per complex symbol unless the name says
``per_level``. For the adaptive class the per-symbol rate of a function is
``ell`` times its per-level code rate; for the GF(4) baseline it is the plain
mutual information ``I(Y; f(X_a, X_b))``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .functions import (
    DecodingFunction,
    GF4Function,
    enumerate_F,
    enumerate_gf4,
    gf4_as_decoding_function,
)
from .infotheory import (
    ConditioningSpec,
    LabeledMixture,
    MixtureGrid,
    QuadratureConfig,
    build_mixture,
    conditional_mi_quadrature,
    enumerate_specs,
)
from .modulation import ChannelState, Constellation, relay_constellation, snr_db_to_n0

MLC = "mlc"
GF4 = "gf4"
CLASSES = (MLC, GF4)


@dataclass(frozen=True)
class RateBound:
    spec: ConditioningSpec
    p: int
    mi_value: float
    bound_value: float


@dataclass(frozen=True)
class RateReport:
    f: DecodingFunction
    channel: ChannelState
    bounds: tuple
    rate_per_level: float
    rate_per_symbol: float
    binding_bound: int


@dataclass(frozen=True)
class UniversalRateReport:
    H_set: tuple
    per_channel: tuple  # (channel, best function, best per-symbol rate)
    universal_rate: float
    function_class: str


class ChannelEvaluator:
    """Rates of many functions at one channel state, sharing one integration grid."""

    def __init__(self, c: Constellation, ch: ChannelState, cfg: QuadratureConfig = QuadratureConfig()):
        self.constellation = c
        self.channel = ch
        self.cfg = cfg
        self.rc = relay_constellation(c, ch)
        self.grid = MixtureGrid(self.rc.points, ch.n0, cfg)
        self._specs = enumerate_specs(c.ell)

    def mi(self, mix: LabeledMixture) -> float:
        return conditional_mi_quadrature(mix, self.channel.n0, self.cfg, engine=self.grid)

    def rate_report(self, f: DecodingFunction) -> RateReport:
        bounds = []
        for spec in self._specs:
            value = self.mi(build_mixture(self.rc, f, spec))
            bounds.append(RateBound(spec, spec.p, value, value / spec.p))
        values = [b.bound_value for b in bounds]
        i = int(np.argmin(values))
        per_level = values[i]
        return RateReport(f, self.channel, tuple(bounds), per_level, self.constellation.ell * per_level, i)

    def plain_mi(self, f: DecodingFunction) -> float:
        """``I(Y; f(X_a, X_b))`` with no extra constraints."""
        ell = self.constellation.ell
        spec = ConditioningSpec((), tuple((k,) for k in range(1, ell + 1)))
        return self.mi(build_mixture(self.rc, f, spec))

    def gf4(self, g: GF4Function) -> float:
        if self.constellation.ell != 2:
            raise ValueError("the GF(4) baseline is defined for ell = 2 only")
        return self.plain_mi(gf4_as_decoding_function(g))

    def class_rates(self, function_class: str) -> list:
        """Per-symbol rate of every member of the class, in enumeration order."""
        if function_class == MLC:
            return [self.rate_report(f).rate_per_symbol for f in enumerate_F(self.constellation.ell)]
        if function_class == GF4:
            return [self.gf4(g) for g in enumerate_gf4()]
        raise ValueError(f"unknown function class {function_class!r}")


def theorem1_rate(
    f: DecodingFunction, ch: ChannelState, c: Constellation, cfg: QuadratureConfig = QuadratureConfig()
) -> RateReport:
    """Minimum over every (target set, partition) bound of ``I / p``."""
    return ChannelEvaluator(c, ch, cfg).rate_report(f)


def two_level_bounds(
    f: DecodingFunction, ch: ChannelState, c: Constellation, cfg: QuadratureConfig = QuadratureConfig()
) -> list:
    """The four ell = 2 bounds written out directly from the label bits.

    In order: ``I(Y;X1,X2)/2``, ``I(Y;X1|X2)``, ``I(Y;X2|X1)``,
    ``I(Y;X1,X2 | X1+X2)``.
    """
    if c.ell != 2:
        raise ValueError("two_level_bounds needs ell = 2")
    rc = relay_constellation(c, ch)
    x_r = np.asarray(f.table)[rc.label_a, rc.label_b]
    hi, lo = x_r >> 1, x_r & 1
    none = np.zeros_like(x_r)
    terms = [
        (LabeledMixture(rc.points, none, x_r, 2.0), 2),
        (LabeledMixture(rc.points, lo, hi, 1.0), 1),
        (LabeledMixture(rc.points, hi, lo, 1.0), 1),
        (LabeledMixture(rc.points, hi ^ lo, x_r, 2.0), 1),
    ]
    return [conditional_mi_quadrature(mix, ch.n0, cfg) / p for mix, p in terms]


def best_function_rate(
    ch: ChannelState, c: Constellation, cfg: QuadratureConfig = QuadratureConfig()
) -> tuple:
    """``(f, report)`` maximizing the per-level rate; ties go to the earliest f."""
    ev = ChannelEvaluator(c, ch, cfg)
    best = None
    for f in enumerate_F(c.ell):
        rep = ev.rate_report(f)
        if best is None or rep.rate_per_level > best[1].rate_per_level:
            best = (f, rep)
    return best


def gf4_function_rate(
    g: GF4Function, ch: ChannelState, c: Constellation, cfg: QuadratureConfig = QuadratureConfig()
) -> float:
    """Plain ``I(Y; alpha*x_a + beta*x_b)`` in bits per symbol."""
    return ChannelEvaluator(c, ch, cfg).gf4(g)


def class_members(function_class: str, ell: int) -> list:
    if function_class == MLC:
        return enumerate_F(ell)
    if function_class == GF4:
        return enumerate_gf4()
    raise ValueError(f"unknown function class {function_class!r}")


def member_id(member) -> str:
    return member.hex_id


def _best_in_class(args) -> tuple:
    c, ch, function_class, cfg = args
    rates = ChannelEvaluator(c, ch, cfg).class_rates(function_class)
    i = int(np.argmax(rates))
    return i, rates


def _map(fn, items: list, workers: int) -> list:
    """Ordered map, in-process for one worker."""
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def universal_rate(
    H: Sequence[ChannelState],
    c: Constellation,
    function_class: str = MLC,
    cfg: QuadratureConfig = QuadratureConfig(),
    workers: int = 1,
) -> UniversalRateReport:
    """``min over H of max over the class`` of the per-symbol rate.

    Channels that differ only by a common phase rotation give identical
    rates, so each such group is evaluated once.
    """
    H = tuple(H)
    if not H:
        raise ValueError("channel set must be non-empty")
    members = class_members(function_class, c.ell)
    keys = [ch.canonical() for ch in H]
    unique: dict = {}
    for key, ch in zip(keys, H):
        unique.setdefault(key, ch)
    order = list(unique)
    results = _map(_best_in_class, [(c, unique[k], function_class, cfg) for k in order], workers)
    best = {k: (members[i], rates[i]) for k, (i, rates) in zip(order, results)}
    per_channel = tuple((ch, *best[k]) for ch, k in zip(H, keys))
    return UniversalRateReport(H, per_channel, min(r for _, _, r in per_channel), function_class)


def phase_grid(m: int, snr_db: float) -> list:
    """Unit-gain channel pairs with both phases on ``{0, pi/m, ..., 2*pi}``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    n0 = snr_db_to_n0(snr_db)
    phases = [k * math.pi / m for k in range(2 * m + 1)]
    return [ChannelState(np.exp(1j * a), np.exp(1j * b), n0) for a in phases for b in phases]


def theta_grid(m: int) -> np.ndarray:
    if m < 1:
        raise ValueError("m must be at least 1")
    return np.arange(2 * m + 1) * math.pi / m


@dataclass(frozen=True)
class ThetaSweep:
    theta: np.ndarray
    function_ids: tuple
    values: np.ndarray  # (len(theta), len(function_ids)), bits per symbol
    envelope: np.ndarray
    universal: float
    function_class: str
    snr_db: float


def _theta_row(args) -> list:
    c, theta, snr_db, function_class, cfg = args
    return ChannelEvaluator(c, ChannelState.from_theta(theta, snr_db), cfg).class_rates(function_class)


def sweep_theta(
    c: Constellation,
    snr_db: float,
    m: int,
    function_class: str = MLC,
    cfg: QuadratureConfig = QuadratureConfig(),
    workers: int = 1,
) -> ThetaSweep:
    """Per-function rates against the phase difference on ``{0, pi/m, ..., 2*pi}``."""
    thetas = theta_grid(m)
    members = class_members(function_class, c.ell)
    rows = _map(_theta_row, [(c, t, snr_db, function_class, cfg) for t in thetas], workers)
    values = np.array(rows, dtype=float)
    envelope = values.max(axis=1)
    return ThetaSweep(
        thetas, tuple(member_id(f) for f in members), values, envelope, float(envelope.min()), function_class, snr_db
    )


@dataclass(frozen=True)
class SnrSweep:
    snr_db: np.ndarray
    classes: tuple
    universal: np.ndarray  # (len(snr_db), len(classes))


def sweep_snr(
    c: Constellation,
    snr_values_db: Iterable[float],
    m: int,
    classes: Sequence[str] = CLASSES,
    cfg: QuadratureConfig = QuadratureConfig(),
    workers: int = 1,
) -> SnrSweep:
    """Universal rate over the phase grid for each SNR and function class."""
    snrs = np.asarray(list(snr_values_db), dtype=float)
    if snrs.size == 0:
        raise ValueError("SNR range is empty")
    classes = tuple(classes)
    out = np.zeros((snrs.size, len(classes)))
    for i, snr in enumerate(snrs):
        H = phase_grid(m, float(snr))
        for j, cls in enumerate(classes):
            out[i, j] = universal_rate(H, c, cls, cfg, workers).universal_rate
    return SnrSweep(snrs, classes, out)

