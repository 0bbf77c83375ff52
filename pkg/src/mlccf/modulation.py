"""Labeled constellations and the multiple-access channel seen by the relay.

Labels are bit vectors ``(x^1, ..., x^ell)``; internally a label is the
integer whose MSB-first binary expansion is that vector, so level 1 is the
most significant bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .f2linalg import all_vectors, as_bits, bits_to_int, int_to_bits

ENERGY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Constellation:
    """``2**ell`` unit-average-energy points; ``points[i]`` is the symbol for label i."""

    ell: int
    points: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel()
        if self.ell < 1:
            raise ValueError("ell must be positive")
        if pts.size != 2**self.ell:
            raise ValueError(f"need {2**self.ell} points for ell={self.ell}, got {pts.size}")
        energy = float(np.mean(np.abs(pts) ** 2))
        if abs(energy - 1.0) > ENERGY_TOL:
            raise ValueError(f"average energy must be 1, got {energy!r}")
        if len(set(np.round(pts, 12))) != pts.size:
            raise ValueError("constellation points must be distinct")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return 2**self.ell

    def map(self, bits) -> complex:
        """Symbol for one label bit vector."""
        bits = as_bits(bits)
        if bits.shape != (self.ell,):
            raise ValueError(f"label must have {self.ell} bits")
        return complex(self.points[bits_to_int(bits)])

    def map_columns(self, x) -> np.ndarray:
        """Symbols for each column of an ell x N bit matrix."""
        x = as_bits(x)
        if x.ndim != 2 or x.shape[0] != self.ell:
            raise ValueError(f"expected an {self.ell} x N bit matrix, got {x.shape}")
        weights = 1 << np.arange(self.ell - 1, -1, -1)
        return self.points[weights @ x.astype(np.int64)]

    def label_of(self, index: int) -> np.ndarray:
        return int_to_bits(index, self.ell)

    def index_of(self, point: complex, tol: float = 1e-9) -> int:
        """Label index of a point (inverse of the label map)."""
        d = np.abs(self.points - point)
        i = int(np.argmin(d))
        if d[i] > tol:
            raise KeyError(f"{point!r} is not a constellation point")
        return i

    @classmethod
    def from_labeled(cls, ell: int, entries: dict, name: str = "custom", normalize: bool = False):
        """Build from ``{label_bits_string: complex}``; optionally rescale to unit energy."""
        pts = np.zeros(2**ell, dtype=complex)
        seen = set()
        for bits, value in entries.items():
            bits = str(bits)
            if len(bits) != ell or set(bits) - {"0", "1"}:
                raise ValueError(f"bad label {bits!r} for ell={ell}")
            i = int(bits, 2)
            if i in seen:
                raise ValueError(f"duplicate label {bits!r}")
            seen.add(i)
            pts[i] = value
        if len(seen) != 2**ell:
            raise ValueError(f"labels must cover all {2**ell} bit patterns")
        if normalize:
            pts = pts / math.sqrt(np.mean(np.abs(pts) ** 2))
        return cls(ell, pts, name)


def make_qpsk_gray() -> Constellation:
    """QPSK with Gray labels: 00 -> 1, 01 -> j, 11 -> -1, 10 -> -j."""
    return Constellation.from_labeled(2, {"00": 1, "01": 1j, "11": -1, "10": -1j}, name="qpsk-gray")


def load_constellation(source: Union[str, Path], normalize: bool = True) -> Constellation:
    """Read a constellation file with one ``bits re im`` line per label.

    Blank lines and ``#`` comments are ignored. Points are rescaled to unit
    average energy unless ``normalize`` is false.
    """
    text = Path(source).read_text()
    return parse_constellation(text, normalize=normalize, name=Path(source).stem)


def parse_constellation(text: str, normalize: bool = True, name: str = "custom") -> Constellation:
    entries = {}
    ell = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 'bits re im', got {raw!r}")
        bits, re, im = parts
        if ell is None:
            ell = len(bits)
        elif len(bits) != ell:
            raise ValueError(f"line {lineno}: label width {len(bits)} != {ell}")
        if bits in entries:
            raise ValueError(f"line {lineno}: duplicate label {bits}")
        entries[bits] = complex(float(re), float(im))
    if ell is None:
        raise ValueError("empty constellation file")
    return Constellation.from_labeled(ell, entries, name=name, normalize=normalize)


@dataclass(frozen=True)
class ChannelState:
    """Gains of the two links into the relay and the complex noise variance."""

    h_a: complex
    h_b: complex
    n0: float

    def __post_init__(self):
        if not (self.n0 > 0 and math.isfinite(self.n0)):
            raise ValueError(f"n0 must be positive and finite, got {self.n0!r}")
        for h in (self.h_a, self.h_b):
            if not (math.isfinite(complex(h).real) and math.isfinite(complex(h).imag)):
                raise ValueError("channel gains must be finite")
        object.__setattr__(self, "h_a", complex(self.h_a))
        object.__setattr__(self, "h_b", complex(self.h_b))
        object.__setattr__(self, "n0", float(self.n0))

    @classmethod
    def from_phases(cls, theta_a: float, theta_b: float, snr_db: float) -> "ChannelState":
        return cls(np.exp(1j * theta_a), np.exp(1j * theta_b), snr_db_to_n0(snr_db))

    @classmethod
    def from_theta(cls, theta: float, snr_db: float) -> "ChannelState":
        """Unit-magnitude gains with phase difference ``theta`` (h_b = 1)."""
        return cls(np.exp(1j * theta), 1.0, snr_db_to_n0(snr_db))

    @property
    def snr_db(self) -> float:
        return 10 * math.log10(1 / self.n0)

    @property
    def theta(self) -> float:
        """Phase difference arg(h_a) - arg(h_b), wrapped to [0, 2*pi)."""
        return float(np.angle(self.h_a) - np.angle(self.h_b)) % (2 * math.pi)

    def rotated(self, phi: float) -> "ChannelState":
        r = np.exp(1j * phi)
        return ChannelState(self.h_a * r, self.h_b * r, self.n0)

    def canonical(self, decimals: int = 12) -> tuple:
        """Key identifying the channel up to a common phase rotation."""
        if self.h_b != 0:
            r = np.conj(self.h_b) / abs(self.h_b)
        elif self.h_a != 0:
            r = np.conj(self.h_a) / abs(self.h_a)
        else:
            r = 1.0
        a, b = self.h_a * r, self.h_b * r
        z = lambda v: round(v, decimals) + 0.0  # noqa: E731  (folds -0.0 into 0.0)
        return (z(a.real), z(a.imag), z(b.real), z(b.imag), z(self.n0))


def snr_db_to_n0(snr_db: float) -> float:
    """Per-node unit symbol energy, so SNR = 1 / N0."""
    return 10 ** (-snr_db / 10)


@dataclass(frozen=True, eq=False)
class RelayConstellation:
    """Noiseless superposition ``h_a*M(x_a) + h_b*M(x_b)`` for every label pair.

    Entry ``i`` corresponds to ``label_a[i], label_b[i]`` with
    ``i = label_a * 2**ell + label_b``.
    """

    ell: int
    points: np.ndarray
    label_a: np.ndarray
    label_b: np.ndarray

    def __len__(self) -> int:
        return self.points.size

    def entries(self):
        """Yield ``(point, bits_a, bits_b)`` for each label pair."""
        for p, a, b in zip(self.points, self.label_a, self.label_b):
            yield complex(p), int_to_bits(int(a), self.ell), int_to_bits(int(b), self.ell)

    def distinct_points(self, decimals: int = 9) -> np.ndarray:
        return np.unique(np.round(self.points, decimals))


def relay_constellation(c: Constellation, ch: ChannelState) -> RelayConstellation:
    q = c.size
    la = np.repeat(np.arange(q), q)
    lb = np.tile(np.arange(q), q)
    pts = ch.h_a * c.points[la] + ch.h_b * c.points[lb]
    for arr in (pts, la, lb):
        arr.setflags(write=False)
    return RelayConstellation(c.ell, pts, la, lb)


def sample_channel(c: Constellation, ch: ChannelState, x_a, x_b, rng: np.random.Generator, size=None):
    """Noisy relay observation(s) for labels ``x_a``, ``x_b``.

    The noise is circularly symmetric with variance ``n0 / 2`` per real
    dimension. ``size`` draws independent observations of the same pair.
    """
    mean = ch.h_a * c.map(x_a) + ch.h_b * c.map(x_b)
    return mean + complex_noise(rng, ch.n0, size)


def complex_noise(rng: np.random.Generator, n0: float, size=None):
    sigma = math.sqrt(n0 / 2)
    w = rng.normal(0.0, sigma, size=size) + 1j * rng.normal(0.0, sigma, size=size)
    return complex(w) if size is None else w


def all_labels(ell: int) -> np.ndarray:
    return all_vectors(ell)
