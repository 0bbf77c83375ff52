import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mlccf import f2linalg as f2
from mlccf.functions import (
    DecodingFunction,
    GF4Function,
    apply,
    enumerate_F,
    enumerate_gf4,
    gf4_as_decoding_function,
    is_unambiguous,
    iter_functions,
    solve_for_partner,
    swap_function,
    xor_function,
)

SWAP = np.array([[0, 1], [1, 0]])
I2 = f2.identity(2)


def bits(s):
    return np.array([int(c) for c in s], dtype=np.uint8)


def test_apply_examples():
    assert apply(xor_function(2), bits("01"), bits("11")).tolist() == [1, 0]
    f2_ = DecodingFunction(I2, SWAP)
    # x_a^1 + x_b^2, x_a^2 + x_b^1 with x_a = x_b = 01
    assert apply(f2_, bits("01"), bits("01")).tolist() == [1, 1]
    for f in enumerate_F(2):
        assert not apply(f, bits("00"), bits("00")).any()


def test_apply_length_mismatch():
    with pytest.raises(ValueError):
        apply(xor_function(2), bits("011"), bits("01"))


def test_enumerate_F_sizes():
    assert len(enumerate_F(1)) == 1
    assert len(enumerate_F(2)) == 36
    assert len(enumerate_F(3)) == 168**2
    with pytest.raises(f2.UnsupportedSizeError):
        enumerate_F(4)
    first = next(iter_functions(4))
    assert first.ell == 4 and first.is_valid()


def test_function_identity_is_injective_in_label_map():
    tables = {f.table.tobytes() for f in enumerate_F(2)}
    assert len(tables) == 36
    assert len(set(enumerate_F(2))) == 36


def test_is_unambiguous_examples():
    assert is_unambiguous(lambda a, b: a ^ b, ell=2)
    assert not is_unambiguous(lambda a, b: 0, ell=2)
    assert not is_unambiguous(lambda a, b: a, ell=2)


@pytest.mark.parametrize("ell", [1, 2, 3])
def test_every_function_is_unambiguous(ell):
    assert all(is_unambiguous(f) for f in enumerate_F(ell))


def test_singular_function_is_ambiguous():
    assert not is_unambiguous(DecodingFunction([[1, 0], [0, 0]], I2))


def gf4_oracle_table(g):
    return [[f2.gf4_mul(g.alpha, a) ^ f2.gf4_mul(g.beta, b) for b in range(4)] for a in range(4)]


def test_gf4_embedding():
    assert gf4_as_decoding_function(GF4Function(1, 1)) == xor_function(2)
    members = set(enumerate_F(2))
    embedded = [gf4_as_decoding_function(g) for g in enumerate_gf4()]
    assert len(set(embedded)) == 9
    assert all(f in members for f in embedded)
    assert len(members) > len(embedded)
    for g, f in zip(enumerate_gf4(), embedded):
        assert f.table.tolist() == gf4_oracle_table(g)


def test_gf4_w_times_a_plus_b():
    g = GF4Function(f2.W, 1)
    f = gf4_as_decoding_function(g)
    for a, b in itertools.product(range(4), repeat=2):
        got = apply(f, f2.int_to_bits(a, 2), f2.int_to_bits(b, 2))
        assert f2.bits_to_int(got) == f2.gf4_mul(f2.W, a) ^ b


def test_gf4_function_rejects_zero():
    with pytest.raises(ValueError):
        GF4Function(0, 1)


def test_solve_for_partner_examples():
    assert solve_for_partner(xor_function(2), bits("11"), bits("01"), "A").tolist() == [1, 0]
    assert solve_for_partner(swap_function(), bits("11"), bits("01"), "A").tolist() == [0, 1]


def test_solve_for_partner_round_trip_exhaustive():
    vecs = f2.all_vectors(2)
    for f in enumerate_F(2):
        for xa in vecs:
            for xb in vecs:
                xr = apply(f, xa, xb)
                assert np.array_equal(solve_for_partner(f, xr, xa, "A"), xb)
                assert np.array_equal(solve_for_partner(f, xr, xb, "B"), xa)


vec3 = st.lists(st.integers(0, 1), min_size=3, max_size=3).map(lambda v: np.array(v, dtype=np.uint8))
F3 = None


@settings(deadline=None)
@given(st.integers(0, 168**2 - 1), vec3, vec3, vec3, vec3)
def test_apply_is_linear(i, x, x2, y, y2):
    global F3
    if F3 is None:
        F3 = enumerate_F(3)
    f = F3[i]
    assert np.array_equal(apply(f, x ^ x2, y ^ y2), apply(f, x, y) ^ apply(f, x2, y2))


def test_hex_ids():
    assert xor_function(2).hex_id == "9|9"
    assert swap_function().hex_id == "9|6"
    assert xor_function(3).hex_id == "111|111"
