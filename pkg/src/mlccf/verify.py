"""Structural self-checks run by ``mlccf verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import f2linalg as f2
from .functions import (
    DecodingFunction,
    apply,
    enumerate_F,
    enumerate_gf4,
    gf4_as_decoding_function,
    is_unambiguous,
)
from .infotheory import (
    QuadratureConfig,
    build_mixture,
    conditional_mi_montecarlo,
    conditional_mi_quadrature,
    enumerate_specs,
)
from .mlc_codec import InducedCodebook, LinearCode, MlcEncoderState, destination_decode, encode, induced_codeword
from .modulation import ChannelState, make_qpsk_gray, relay_constellation
from .rates import ChannelEvaluator, two_level_bounds


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str
    failures: list = field(default_factory=list)


def unambiguity_suite(inject_singular: bool = False) -> SuiteResult:
    counts = {}
    failures = []
    for ell in (2, 3):
        fs = enumerate_F(ell)
        if inject_singular:
            bad = np.zeros((ell, ell), dtype=np.uint8)
            bad[0, 0] = 1
            fs = [DecodingFunction(bad, f2.identity(ell), name="injected-singular")] + fs
        counts[ell] = len(fs)
        failures += [f"ell={ell} {f!r}" for f in fs if not is_unambiguous(f)]
    detail = ", ".join(f"{n} functions checked at ell={ell}" for ell, n in counts.items())
    return SuiteResult("unambiguity", not failures, detail, failures)


def cardinality_suite() -> SuiteResult:
    checks = {
        "|GL(2,2)| = 6": len(f2.enumerate_gl(2)) == 6,
        "|GL(3,2)| = 168": len(f2.enumerate_gl(3)) == 168,
        "|F| = 36 at ell=2": len(enumerate_F(2)) == 36,
        "4 bounds per function at ell=2": len(enumerate_specs(2)) == 4,
        "14 bounds per function at ell=3": len(enumerate_specs(3)) == 14,
    }
    failures = [k for k, ok in checks.items() if not ok]
    return SuiteResult("cardinalities", not failures, "; ".join(checks), failures)


def gf4_inclusion_suite() -> SuiteResult:
    members = set(enumerate_F(2))
    failures = []
    for g in enumerate_gf4():
        f = gf4_as_decoding_function(g)
        if f not in members:
            failures.append(f"{g.hex_id} not in F")
        for a in range(4):
            for b in range(4):
                got = f2.bits_to_int(apply(f, f2.int_to_bits(a, 2), f2.int_to_bits(b, 2)))
                if got != g(a, b):
                    failures.append(f"{g.hex_id} disagrees at ({a},{b})")
    return SuiteResult("gf4-inclusion", not failures, "9 GF(4) functions embedded and checked on 16 pairs", failures)


def induced_codeword_suite(rng: np.random.Generator, random_trials: int = 1000) -> SuiteResult:
    fs = enumerate_F(2)
    failures = []
    checked = 0
    for k, n in ((1, 2), (2, 4)):
        code = LinearCode.random(k, n, rng)
        st_a = MlcEncoderState.random(code, 2, rng)
        st_b = MlcEncoderState.random(code, 2, rng)
        msgs = f2.all_vectors(2 * k).reshape(-1, 2, k)
        for f in fs:
            icb = InducedCodebook.from_encoders(f, st_a, st_b)
            for u_a in msgs:
                x_a, _ = encode(st_a, u_a)
                for u_b in msgs:
                    x_b, _ = encode(st_b, u_b)
                    u_r = f2.matmul_f2(f.d_a, u_a) ^ f2.matmul_f2(f.d_b, u_b)
                    checked += 1
                    if not np.array_equal(induced_codeword(f, x_a, x_b), icb.codeword(u_r)):
                        failures.append(f"{f!r} k={k} n={n}")
    for _ in range(random_trials):
        ell = int(rng.integers(2, 4))
        k = int(rng.integers(1, 9))
        n = int(rng.integers(k, 17))
        gl = f2.enumerate_gl(ell)
        f = DecodingFunction(gl[rng.integers(len(gl))], gl[rng.integers(len(gl))])
        code = LinearCode.random(k, n, rng)
        st_a, st_b = MlcEncoderState.random(code, ell, rng), MlcEncoderState.random(code, ell, rng)
        u_a = rng.integers(0, 2, size=(ell, k), dtype=np.uint8)
        u_b = rng.integers(0, 2, size=(ell, k), dtype=np.uint8)
        u_r = f2.matmul_f2(f.d_a, u_a) ^ f2.matmul_f2(f.d_b, u_b)
        lhs = induced_codeword(f, encode(st_a, u_a)[0], encode(st_b, u_b)[0])
        checked += 1
        if not np.array_equal(lhs, InducedCodebook.from_encoders(f, st_a, st_b).codeword(u_r)):
            failures.append(f"random instance ell={ell} k={k} n={n}")
    return SuiteResult("induced-codeword", not failures, f"{checked} instances bit-exact", failures)


def end_to_end_suite(rng: np.random.Generator) -> SuiteResult:
    failures = []
    checked = 0
    code = LinearCode.random(1, 2, rng)
    st_a, st_b = MlcEncoderState.random(code, 2, rng), MlcEncoderState.random(code, 2, rng)
    msgs = f2.all_vectors(2).reshape(-1, 2, 1)
    for f in enumerate_F(2):
        for u_a in msgs:
            for u_b in msgs:
                x_r = induced_codeword(f, encode(st_a, u_a)[0], encode(st_b, u_b)[0])
                ok_a = np.array_equal(destination_decode(x_r, u_a, st_a, st_b.coset, f, "A"), u_b)
                ok_b = np.array_equal(destination_decode(x_r, u_b, st_b, st_a.coset, f, "B"), u_a)
                checked += 1
                if not (ok_a and ok_b):
                    failures.append(f"{f!r}")
    return SuiteResult("end-to-end", not failures, f"{checked} message pairs over 36 functions", failures)


def two_level_suite(rng: np.random.Generator, points: int = 5, cfg: QuadratureConfig = QuadratureConfig()) -> SuiteResult:
    c = make_qpsk_gray()
    fs = enumerate_F(2)
    failures = []
    for _ in range(points):
        ch = ChannelState.from_theta(rng.uniform(0, 2 * math.pi), rng.uniform(0, 20))
        f = fs[rng.integers(len(fs))]
        general = sorted(b.bound_value for b in ChannelEvaluator(c, ch, cfg).rate_report(f).bounds)
        direct = sorted(two_level_bounds(f, ch, c, cfg))
        if len(general) != 4 or max(abs(a - b) for a, b in zip(general, direct)) > 1e-3:
            failures.append(f"{f!r} theta={ch.theta:.3f} snr={ch.snr_db:.2f}")
    return SuiteResult("two-level-bounds", not failures, f"{points} random points, 4 bounds each", failures)


def mc_blind_spot(max_bits: float, samples: int) -> float:
    """Largest information that can hide in events rarer than one draw in ``samples``.

    Near saturation the missing information sits in noise events the sampler
    never visits, so the sample standard error shrinks to round-off while the
    estimate is still biased by up to this much.
    """
    return max_bits / samples


def oracle_suite(rng: np.random.Generator, points: int = 2, samples: int = 200_000) -> SuiteResult:
    c = make_qpsk_gray()
    fs = enumerate_F(2)
    failures = []
    terms = 0
    for _ in range(points):
        ch = ChannelState.from_theta(rng.uniform(0, 2 * math.pi), rng.uniform(0, 15))
        rc = relay_constellation(c, ch)
        f = fs[rng.integers(len(fs))]
        for spec in enumerate_specs(2):
            mix = build_mixture(rc, f, spec)
            q = conditional_mi_quadrature(mix, ch.n0)
            est, se = conditional_mi_montecarlo(mix, ch.n0, samples, rng)
            terms += 1
            if abs(q - est) > 3 * se + mc_blind_spot(mix.max_bits, samples):
                failures.append(f"{spec.describe()} quad={q:.5f} mc={est:.5f}+-{se:.5f}")
    return SuiteResult("quadrature-vs-montecarlo", not failures, f"{terms} terms within 3 standard errors", failures)


def run_all(seed: int = 0, inject_singular: bool = False, mc_samples: int = 200_000) -> list:
    rng = np.random.default_rng(seed)
    return [
        unambiguity_suite(inject_singular),
        cardinality_suite(),
        gf4_inclusion_suite(),
        induced_codeword_suite(rng),
        end_to_end_suite(rng),
        two_level_suite(rng),
        oracle_suite(rng, samples=mc_samples),
    ]
