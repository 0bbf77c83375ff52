import itertools
import math

import numpy as np
import pytest

from mlccf import f2linalg as f2
from mlccf.functions import enumerate_F, swap_function, xor_function
from mlccf.mlc_codec import (
    DecodingFailure,
    InducedCodebook,
    LinearCode,
    MlcEncoderState,
    destination_decode,
    effective_message,
    encode,
    induced_codeword,
    label_collisions,
    relay_decode_joint,
    simulate,
)
from mlccf.modulation import ChannelState

G_EX = np.array([[1, 0, 1, 1], [0, 1, 0, 1]], dtype=np.uint8)


def setup(rng, k=2, n=4, ell=2, code=None):
    code = code or LinearCode.random(k, n, rng)
    return code, MlcEncoderState.random(code, ell, rng), MlcEncoderState.random(code, ell, rng)


def test_encode_worked_example():
    code = LinearCode(G_EX)
    st = MlcEncoderState(code, 2, np.zeros((2, 4), dtype=np.uint8))
    x, sym = encode(st, [[1, 0], [1, 1]])
    assert x.tolist() == [[1, 0, 1, 1], [1, 1, 1, 0]]
    assert sym.size == 0
    st2 = MlcEncoderState(code, 2, [[1, 1, 0, 0], [0, 0, 0, 1]])
    assert encode(st2, [[1, 0], [1, 1]])[0].tolist() == [[0, 1, 1, 1], [1, 1, 1, 1]]


def test_encode_maps_columns_to_symbols(qpsk):
    code = LinearCode(G_EX)
    st = MlcEncoderState(code, 2, np.zeros((2, 4), dtype=np.uint8))
    x, sym = encode(st, [[1, 0], [1, 1]], qpsk)
    for t in range(4):
        assert sym[t] == qpsk.map(x[:, t])


def test_encode_shape_checks(qpsk, psk8):
    code = LinearCode(G_EX)
    st = MlcEncoderState(code, 2, np.zeros((2, 4), dtype=np.uint8))
    with pytest.raises(ValueError):
        encode(st, [[1, 0, 1], [1, 1, 0]])
    with pytest.raises(ValueError):
        encode(st, [[1, 0], [1, 1]], psk8)
    with pytest.raises(ValueError):
        MlcEncoderState(code, 2, np.zeros((3, 4)))
    with pytest.raises(ValueError):
        LinearCode([[1, 1], [1, 1]])


def test_encoding_is_affine():
    rng = np.random.default_rng(0)
    code, st, _ = setup(rng, 3, 6)
    zero = encode(st, np.zeros((2, 3), dtype=np.uint8))[0]
    assert np.array_equal(zero, st.coset)
    for _ in range(20):
        u1 = rng.integers(0, 2, (2, 3), dtype=np.uint8)
        u2 = rng.integers(0, 2, (2, 3), dtype=np.uint8)
        lhs = encode(st, u1 ^ u2)[0]
        rhs = encode(st, u1)[0] ^ encode(st, u2)[0] ^ st.coset
        assert np.array_equal(lhs, rhs)


def test_parity_check_membership():
    rng = np.random.default_rng(1)
    for _ in range(10):
        code = LinearCode.random(3, 7, rng)
        words = f2.matmul_f2(f2.all_vectors(3), code.g)
        assert code.contains(words).all()
        outside = [w for w in f2.all_vectors(7) if not any((w == c).all() for c in words)]
        assert not code.contains(np.array(outside)).any()


def test_induced_codeword_identity_random():
    rng = np.random.default_rng(2)
    fs = enumerate_F(2)
    for _ in range(200):
        code, st_a, st_b = setup(rng, int(rng.integers(1, 4)), 6)
        f = fs[rng.integers(36)]
        icb = InducedCodebook.from_encoders(f, st_a, st_b)
        u_a = rng.integers(0, 2, (2, code.k), dtype=np.uint8)
        u_b = rng.integers(0, 2, (2, code.k), dtype=np.uint8)
        x_r = induced_codeword(f, encode(st_a, u_a)[0], encode(st_b, u_b)[0])
        u_r = f2.matmul_f2(f.d_a, u_a) ^ f2.matmul_f2(f.d_b, u_b)
        assert np.array_equal(x_r, icb.codeword(u_r))
        assert icb.contains(x_r)
        assert np.array_equal(effective_message(icb, x_r), u_r)


def test_induced_codeword_acts_per_column():
    rng = np.random.default_rng(3)
    f = enumerate_F(2)[17]
    x_a = rng.integers(0, 2, (2, 5), dtype=np.uint8)
    x_b = rng.integers(0, 2, (2, 5), dtype=np.uint8)
    x_r = induced_codeword(f, x_a, x_b)
    for t in range(5):
        a, b = f2.bits_to_int(x_a[:, t]), f2.bits_to_int(x_b[:, t])
        assert f2.bits_to_int(x_r[:, t]) == f.table[a, b]


def test_effective_message_rejects_off_coset():
    rng = np.random.default_rng(4)
    code, st_a, st_b = setup(rng, 1, 4)
    icb = InducedCodebook.from_encoders(xor_function(2), st_a, st_b)
    words = {f2.bits_to_int(icb.codeword(u.reshape(2, 1))) for u in f2.all_vectors(2)}
    bad = next(v for v in range(256) if v not in words)
    with pytest.raises(DecodingFailure):
        effective_message(icb, f2.int_to_bits(bad, 8).reshape(2, 4))


@pytest.mark.parametrize("theta", [0.0, math.pi / 4, math.pi / 2])
def test_noiseless_relay_decoding(qpsk, theta):
    rng = np.random.default_rng(5)
    ch = ChannelState.from_theta(theta, 200)
    for f in (xor_function(2), swap_function(), enumerate_F(2)[30]):
        collide = label_collisions(f, ch, qpsk)
        code, st_a, st_b = setup(rng, 2, 4)
        icb = InducedCodebook.from_encoders(f, st_a, st_b)
        misses = 0
        msgs = f2.all_vectors(4).reshape(-1, 2, 2)
        for u_a, u_b in itertools.product(msgs, repeat=2):
            x_a, s_a = encode(st_a, u_a, qpsk)
            x_b, s_b = encode(st_b, u_b, qpsk)
            y = ch.h_a * s_a + ch.h_b * s_b
            x_hat = relay_decode_joint(y, ch, f, icb, qpsk)
            if not np.array_equal(x_hat, induced_codeword(f, x_a, x_b)):
                misses += 1
        # without noise, a miss is only possible when distinct labels share a point
        if not collide:
            assert misses == 0
        if misses:
            assert collide


def test_xor_collides_only_off_axis(qpsk):
    assert label_collisions(xor_function(2), ChannelState.from_theta(0, 10), qpsk) == []
    assert label_collisions(xor_function(2), ChannelState.from_theta(math.pi / 2, 10), qpsk)


def test_block_error_rate_at_high_snr(qpsk):
    res = simulate(qpsk, ChannelState.from_theta(0.0, 30), xor_function(2), 2, 4, 1000, np.random.default_rng(6))
    assert res.block_error_rate < 1e-2
    assert res.destination_errors <= res.block_errors


def test_simulation_is_seeded(qpsk):
    ch = ChannelState.from_theta(0.3, 3)
    a = simulate(qpsk, ch, xor_function(2), 1, 3, 50, np.random.default_rng(9))
    b = simulate(qpsk, ch, xor_function(2), 1, 3, 50, np.random.default_rng(9))
    assert a == b
    assert a.block_errors > 0


def test_wrong_coset_shifts_message(qpsk):
    """Decoding under Lambda' = Lambda + V G finds the same word and message U + V."""
    rng = np.random.default_rng(7)
    f = xor_function(2)
    ch = ChannelState.from_theta(0.0, 40)
    code, st_a, st_b = setup(rng, 2, 5)
    icb = InducedCodebook.from_encoders(f, st_a, st_b)
    v = rng.integers(0, 2, (2, 2), dtype=np.uint8)
    shifted = InducedCodebook(f, icb.effective_coset ^ f2.matmul_f2(v, code.g), code)
    u_a = rng.integers(0, 2, (2, 2), dtype=np.uint8)
    u_b = rng.integers(0, 2, (2, 2), dtype=np.uint8)
    x_a, s_a = encode(st_a, u_a, qpsk)
    x_b, s_b = encode(st_b, u_b, qpsk)
    y = ch.h_a * s_a + ch.h_b * s_b
    x1 = relay_decode_joint(y, ch, f, icb, qpsk)
    x2 = relay_decode_joint(y, ch, f, shifted, qpsk)
    assert np.array_equal(x1, x2)
    assert np.array_equal(effective_message(shifted, x2), effective_message(icb, x1) ^ v)


def test_destination_round_trip_exhaustive_small():
    code = LinearCode([[1, 1]])
    rng = np.random.default_rng(8)
    for f in enumerate_F(2):
        st_a = MlcEncoderState.random(code, 2, rng)
        st_b = MlcEncoderState.random(code, 2, rng)
        for ua, ub in itertools.product(f2.all_vectors(2), repeat=2):
            u_a, u_b = ua.reshape(2, 1), ub.reshape(2, 1)
            x_r = induced_codeword(f, encode(st_a, u_a)[0], encode(st_b, u_b)[0])
            assert np.array_equal(destination_decode(x_r, u_a, st_a, st_b.coset, f, "A"), u_b)
            assert np.array_equal(destination_decode(x_r, u_b, st_b, st_a.coset, f, "B"), u_a)


def test_destination_round_trip_random():
    rng = np.random.default_rng(10)
    fs = enumerate_F(2)
    for _ in range(100):
        code, st_a, st_b = setup(rng, 4, 8)
        f = fs[rng.integers(36)]
        u_a = rng.integers(0, 2, (2, 4), dtype=np.uint8)
        u_b = rng.integers(0, 2, (2, 4), dtype=np.uint8)
        x_r = induced_codeword(f, encode(st_a, u_a)[0], encode(st_b, u_b)[0])
        assert np.array_equal(destination_decode(x_r, u_a, st_a, st_b.coset, f, "A"), u_b)
        assert np.array_equal(destination_decode(x_r, u_b, st_b, st_a.coset, f, "b"), u_a)


def test_destination_detects_tampering():
    rng = np.random.default_rng(11)
    # repetition code: any single flipped bit leaves the code
    code, st_a, st_b = setup(rng, code=LinearCode(np.ones((1, 6), dtype=np.uint8)))
    f = xor_function(2)
    u_a = np.array([[1], [0]], dtype=np.uint8)
    u_b = np.array([[0], [1]], dtype=np.uint8)
    x_r = induced_codeword(f, encode(st_a, u_a)[0], encode(st_b, u_b)[0])
    bad = x_r.copy()
    bad[0, 0] ^= 1
    with pytest.raises(DecodingFailure):
        destination_decode(bad, u_a, st_a, st_b.coset, f, "A")
    with pytest.raises(ValueError):
        destination_decode(x_r, u_a, st_a, st_b.coset, f, "C")


def test_search_size_limit(qpsk):
    rng = np.random.default_rng(12)
    code, st_a, st_b = setup(rng, 9, 12)
    icb = InducedCodebook.from_encoders(xor_function(2), st_a, st_b)
    with pytest.raises(f2.UnsupportedSizeError):
        relay_decode_joint(np.zeros(12), ChannelState(1, 1, 1.0), xor_function(2), icb, qpsk)
