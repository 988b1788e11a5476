import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pbcodes import gf
from pbcodes.errors import SingularMatrixError

byte = st.integers(0, 255)


def clmul_reduce(a, b):
    """Reference multiply: shift-and-add with reduction by 0x11D at every step."""
    out = 0
    for _ in range(8):
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a & 0x100:
            a ^= 0x11D
    return out


def test_add_examples():
    assert gf.add(0x00, 0x5A) == 0x5A
    assert gf.add(0x5A, 0x5A) == 0x00
    assert gf.add(0x53, 0xCA) == 0x99


def test_mul_examples():
    assert gf.mul(0x01, 0x7F) == 0x7F
    assert gf.mul(0x02, 0x03) == 0x06
    assert gf.mul(0x80, 0x02) == 0x1D
    assert clmul_reduce(0x80, 0x02) == 0x1D


def test_tables_round_trip():
    t = gf.TABLES
    assert len(t.antilog) == 510
    assert t.poly == 0x11D
    for x in range(1, 256):
        assert t.antilog[t.log[x]] == x


def test_multiplicative_group_cyclic():
    seen = {gf.power(2, e) for e in range(255)}
    assert len(seen) == 255 and 0 not in seen


def test_mul_table_exhaustive():
    ref = np.array([[clmul_reduce(a, b) for b in range(256)] for a in range(256)], dtype=np.uint8)
    assert np.array_equal(gf.MUL, ref)


def test_mul_bitwise_agrees_exhaustive():
    for a in range(256):
        for b in range(0, 256, 7):
            assert gf.mul_bitwise(a, b) == clmul_reduce(a, b)


def test_inv_exhaustive_search():
    assert gf.inv(1) == 1
    for a in range(1, 256):
        expect = next(b for b in range(1, 256) if clmul_reduce(a, b) == 1)
        assert gf.inv(a) == expect


def test_inv_zero():
    with pytest.raises(ZeroDivisionError, match="no inverse of zero"):
        gf.inv(0)


def test_distributivity_random():
    rng = np.random.default_rng(7)
    a, b, c = rng.integers(0, 256, (3, 10_000))
    lhs = gf.MUL[a, b ^ c]
    rhs = gf.MUL[a, b] ^ gf.MUL[a, c]
    assert np.array_equal(lhs, rhs)


@given(byte, byte, byte)
def test_mul_associative_commutative(a, b, c):
    assert gf.mul(a, b) == gf.mul(b, a)
    assert gf.mul(gf.mul(a, b), c) == gf.mul(a, gf.mul(b, c))


@given(byte, st.integers(1, 255))
def test_div_inverts_mul(a, b):
    assert gf.div(gf.mul(a, b), b) == a


def test_dot_matches_scalar_loop():
    rng = np.random.default_rng(3)
    c = rng.integers(0, 256, 9, dtype=np.uint8)
    v = rng.integers(0, 256, (9, 5), dtype=np.uint8)
    expect = np.zeros(5, dtype=np.uint8)
    for i in range(9):
        for j in range(5):
            expect[j] ^= clmul_reduce(int(c[i]), int(v[i, j]))
    assert np.array_equal(gf.dot(c, v), expect)


def test_matmul_matches_dot():
    rng = np.random.default_rng(4)
    A = rng.integers(0, 256, (6, 4), dtype=np.uint8)
    B = rng.integers(0, 256, (4, 3, 2), dtype=np.uint8)
    out = gf.matmul(A, B)
    for i in range(6):
        assert np.array_equal(out[i], gf.dot(A[i], B))


def _random_invertible(rng, m):
    while True:
        A = rng.integers(0, 256, (m, m), dtype=np.uint8)
        if gf.rank(A) == m:
            return A


def test_solve_identity():
    y = np.arange(5, dtype=np.uint8)
    assert np.array_equal(gf.solve_linear(np.eye(5, dtype=np.uint8), y), y)


def test_solve_random_4x4_multiply_back():
    rng = np.random.default_rng(11)
    A = _random_invertible(rng, 4)
    x = rng.integers(0, 256, 4, dtype=np.uint8)
    y = gf.matmul(A, x)
    assert np.array_equal(gf.solve_linear(A, y), x)


@pytest.mark.parametrize("m", [1, 2, 7, 16, 32])
def test_solve_round_trip_with_lanes(m):
    rng = np.random.default_rng(m)
    A = _random_invertible(rng, m)
    x = rng.integers(0, 256, (m, 3, 4), dtype=np.uint8)
    assert np.array_equal(gf.solve_linear(A, gf.matmul(A, x)), x)


def test_solve_singular_reports_rank():
    A = np.array([[1, 2, 3], [1, 2, 3], [4, 5, 6]], dtype=np.uint8)
    with pytest.raises(SingularMatrixError) as info:
        gf.solve_linear(A, np.zeros(3, dtype=np.uint8))
    assert info.value.rank == 2
    assert "singular system" in str(info.value)


def test_inverse():
    rng = np.random.default_rng(5)
    A = _random_invertible(rng, 6)
    assert np.array_equal(gf.matmul(A, gf.inverse(A)), np.eye(6, dtype=np.uint8))
