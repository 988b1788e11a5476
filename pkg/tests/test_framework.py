from itertools import combinations

import numpy as np
import pytest

from pbcodes import framework, genpb, gf, mds, rsr2
from pbcodes.errors import DecodeError


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def test_plain_decode_reads_systematic(rng):
    code = mds.make_code(7, 4)
    msgs = rng.integers(0, 256, (3, 4), dtype=np.uint8)
    arr = framework.encode_plain(code, msgs)
    assert np.array_equal(arr.cells[:4].T, msgs)
    assert np.array_equal(framework.decode_full(arr, range(4)), msgs)


def test_zero_piggyback_is_noop(rng):
    code = mds.make_code(8, 4)
    arr = framework.encode_plain(code, rng.integers(0, 256, (3, 4), dtype=np.uint8))
    out = framework.attach_piggyback(arr, (6, 2), np.zeros(12, dtype=np.uint8))
    assert np.array_equal(out.cells, arr.cells)
    assert np.array_equal(out.coeffs, arr.coeffs)


def test_systematic_target_rejected(rng):
    code = mds.make_code(8, 4)
    arr = framework.encode_plain(code, rng.integers(0, 256, (3, 4), dtype=np.uint8))
    src = np.zeros(12, dtype=np.uint8)
    src[0] = 1
    with pytest.raises(ValueError, match="systematic cells immutable"):
        framework.attach_piggyback(arr, (2, 2), src)


def test_causality(rng):
    code = mds.make_code(8, 4)
    arr = framework.encode_plain(code, rng.integers(0, 256, (3, 4), dtype=np.uint8))
    src = np.zeros(12, dtype=np.uint8)
    src[2 * 4 + 1] = 1  # reads stripe 2
    with pytest.raises(ValueError, match="piggyback causality violation"):
        framework.attach_piggyback(arr, (5, 2), src)
    out = framework.attach_piggyback(arr, (5, 2), src, transform=True)
    assert out.cells[5, 2] == arr.cells[5, 2] ^ arr.cells[1, 2]


def test_attach_adds_dot_product(rng):
    code = mds.make_code(8, 4)
    msgs = rng.integers(0, 256, (3, 4, 5), dtype=np.uint8)
    arr = framework.encode_plain(code, msgs)
    src = np.zeros(12, dtype=np.uint8)
    src[:8] = rng.integers(0, 256, 8)
    out = framework.attach_piggyback(arr, (7, 2), src)
    expect = arr.cells[7, 2] ^ gf.dot(src, msgs.reshape(12, 5))
    assert np.array_equal(out.cells[7, 2], expect)
    assert gf.rank(out.coeffs) == 12


def test_worked_cell_gains_a1_plus_a3():
    gp = genpb.make_params(8, 4, 3, 2)
    asg = genpb.build_assignment(gp)
    arr = genpb.encode_gen(gp, asg, np.zeros((5, 4), dtype=np.uint8))
    base = framework.base_coeffs(gp.code, 5)
    # node 6 / stripe 4 in 1-based terms
    delta = arr.cell_coeffs(5, 3) ^ base[5 * 5 + 3]
    expect = np.zeros(20, dtype=np.uint8)
    expect[[0, 2]] = 1  # a_1, a_3
    assert np.array_equal(delta, expect)


def _layouts():
    gp = genpb.make_params(8, 4, 3, 2)
    rc = rsr2.build_rsr2(8, 4)
    return {
        "plain": (mds.make_code(8, 4), lambda m: framework.encode_plain(mds.make_code(8, 4), m), 5),
        "rsr2": (rc.code, lambda m: rsr2.encode_rsr2(rc, m), rc.alpha),
        "gen": (gp.code, lambda m: genpb.encode_gen(gp, genpb.build_assignment(gp), m), 5),
    }


@pytest.mark.parametrize("name", ["plain", "rsr2", "gen"])
def test_decode_every_4_subset(name, rng):
    code, enc, alpha = _layouts()[name]
    msgs = rng.integers(0, 256, (alpha, 4, 3), dtype=np.uint8)
    arr = enc(msgs)
    assert arr.cells.shape[:2] == (8, alpha)  # no extra storage
    assert gf.rank(arr.coeffs) == 4 * alpha
    for sub in combinations(range(8), 4):
        assert np.array_equal(framework.decode_full(arr, sub), msgs)


def test_gen_decode_from_parity_nodes(rng):
    code, enc, alpha = _layouts()["gen"]
    msgs = rng.integers(0, 256, (5, 4), dtype=np.uint8)
    assert np.array_equal(framework.decode_full(enc(msgs), {4, 5, 6, 7}), msgs)


def test_recursive_and_generic_decoders_agree(rng):
    gp = genpb.make_params(10, 5, 3, 2)
    asg = genpb.build_assignment(gp)
    msgs = rng.integers(0, 256, (5, 5, 4), dtype=np.uint8)
    arr = genpb.encode_gen(gp, asg, msgs)
    for sub in combinations(range(10), 5):
        rec = framework.decode_recursive(arr, sub)
        assert np.array_equal(rec, framework.decode_full(arr, sub))


def test_recursive_decode_rsr2_after_inverse_transform(rng):
    rc = rsr2.build_rsr2(9, 4)
    msgs = rng.integers(0, 256, (rc.alpha, 4), dtype=np.uint8)
    arr = rsr2.encode_rsr2(rc, msgs)
    with pytest.raises(ValueError, match="causal"):
        framework.decode_recursive(arr, [4, 5, 6, 7])
    causal = rsr2.to_piggyback_form(rc, arr)
    for sub in combinations(range(9), 4):
        assert np.array_equal(framework.decode_recursive(causal, sub), msgs)


def test_decode_needs_k_nodes(rng):
    code = mds.make_code(8, 4)
    arr = framework.encode_plain(code, rng.integers(0, 256, (2, 4), dtype=np.uint8))
    with pytest.raises(DecodeError, match="undecodable node set"):
        framework.decode_full(arr, [0, 5, 6])


def test_downloader_ledger():
    cells = np.arange(12, dtype=np.uint8).reshape(4, 3)
    dl = framework.Downloader(lambda n, s: cells[n, s], failed=1)
    assert dl.get(0, 2) == 2
    assert dl.get(0, 2) == 2
    dl.get(3, 0)
    assert dl.downloaded == [(0, 2), (3, 0)]
    with pytest.raises(DecodeError):
        dl.get(1, 0)
