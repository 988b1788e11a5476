from fractions import Fraction

import numpy as np
import pytest

from pbcodes import analysis, framework, gf, rsr2
from pbcodes.errors import ConfigError

CONFIGS = [(7, 4), (8, 4), (10, 5), (12, 8), (20, 10), (11, 6)]


def even_sizes(k, parts):
    """Independent oracle: deal k nodes round-robin, then sort sizes descending."""
    sizes = [0] * parts
    for x in range(k):
        sizes[x % parts] += 1
    return sorted(sizes, reverse=True)


def test_node_sets_10_5():
    ns = rsr2.build_rsr2(10, 5).node_sets
    assert (ns.t_l, ns.t_h, ns.t) == (1, 2, 1)
    assert [len(s) for s in ns.sets] == [2, 1, 1, 1]


def test_node_sets_20_10():
    ns = rsr2.build_rsr2(20, 10).node_sets
    assert [len(s) for s in ns.sets] == [2, 1, 1, 1, 1, 1, 1, 1, 1]
    assert ns.t == 1


@pytest.mark.parametrize("k,parts", [(k, p) for k in range(2, 30) for p in range(2, 12)])
def test_split_nodes_even_partition(k, parts):
    ns = rsr2.split_nodes(k, parts)
    sizes = [len(s) for s in ns.sets]
    assert sizes == even_sizes(k, parts)
    assert sorted(x for s in ns.sets for x in s) == list(range(k))
    assert sizes.count(ns.t_h) >= ns.t


def test_requires_three_parities():
    with pytest.raises(ConfigError, match="at least 3 parities"):
        rsr2.build_rsr2(6, 4)


@pytest.mark.parametrize("n,k", CONFIGS)
def test_selection_vectors_sum_to_parity(n, k):
    rc = rsr2.build_rsr2(n, k)
    for i in range(2, rc.r + 1):
        total = np.zeros(k, dtype=np.uint8)
        for j in range(1, rc.r):
            q = rc.q(i, j)
            outside = [x for x in range(k) if x not in rc.node_sets.sets[j - 1]]
            assert not q[outside].any()
            total ^= q
        assert np.array_equal(total, rc.code.parity[i - 1])


def test_eval_points_distinct_nonzero():
    rc = rsr2.build_rsr2(20, 10)
    pts = list(rc.eval_points.values())
    assert len(set(pts)) == len(pts) and 0 not in pts
    assert rc.alpha == 17


def test_encode_zero():
    rc = rsr2.build_rsr2(10, 5)
    arr = rsr2.encode_rsr2(rc, np.zeros((7, 5), dtype=np.uint8))
    assert not arr.cells.any()


def test_encode_wrong_count():
    rc = rsr2.build_rsr2(10, 5)
    with pytest.raises(ValueError):
        rsr2.encode_rsr2(rc, np.zeros((6, 5), dtype=np.uint8))


def test_stored_layout_matches_transformed_form():
    """Spot-check cells against a direct evaluation of the transformed parity node."""
    rc = rsr2.build_rsr2(9, 4)
    r, k = rc.r, 4
    rng = np.random.default_rng(9)
    a = rng.integers(0, 256, (rc.alpha, k), dtype=np.uint8)
    arr = rsr2.encode_rsr2(rc, a)

    def pdot(vec, msg):
        out = 0
        for x in range(k):
            out ^= gf.mul_bitwise(int(vec[x]), int(msg[x]))
        return out

    for i in range(2, r + 1):
        node = k + i - 1
        p = rc.code.parity[i - 1]
        for m in range(r - 2):
            assert arr.cells[node, m] == pdot(p, a[m])
        expect = pdot(rc.q(i, i - 1), a[r - 2])
        for m in range(r - 1, rc.alpha):
            expect ^= pdot(p, a[m])
        assert arr.cells[node, r - 2] == expect
        v = np.zeros(k, dtype=np.uint8)
        for m in range(r - 1):
            v ^= gf.scale(gf.power(i, r - 2 - m), a[m])
        slots = [j for j in range(1, r) if j != i - 1]
        for u, j in enumerate(slots):
            stripe = r - 1 + u
            assert arr.cells[node, stripe] == pdot(p, a[stripe]) ^ pdot(rc.q(i, j), v)
    for m in range(rc.alpha):
        assert arr.cells[k, m] == pdot(rc.code.parity[0], a[m])


def test_repair_download_10_5_big_set():
    rc = rsr2.build_rsr2(10, 5)
    arr = rsr2.encode_rsr2(rc, np.random.default_rng(0).integers(0, 256, (7, 5), dtype=np.uint8))
    r, k, t_h = 5, 5, 2
    expect = (r - 2) * k + (r - 1) + (r - 1) * (t_h - 1)
    assert expect == 23
    for l in rc.node_sets.sets[0]:
        _, rep = rsr2.repair_systematic_rsr2(rc, arr, l)
        assert rep.symbol_count == 23
        assert len(set(rep.downloaded)) == 23
        assert all(node != l for node, _ in rep.downloaded)


@pytest.mark.parametrize("n,k", CONFIGS)
def test_per_node_download_matches_closed_form(n, k):
    rc = rsr2.build_rsr2(n, k)
    arr = rsr2.encode_rsr2(rc, np.zeros((rc.alpha, k), dtype=np.uint8))
    total = 0
    for l in range(k):
        _, rep = rsr2.repair_systematic_rsr2(rc, arr, l)
        size = len(rc.node_sets.sets[rc.node_sets.index_of(l) - 1])
        assert rep.symbol_count == analysis.rsr2_repair_download(n, k, size)
        total += rep.symbol_count
    assert Fraction(total, k * k * rc.alpha) == analysis.gamma1(n, k)


def test_average_ratio_10_5():
    rc = rsr2.build_rsr2(10, 5)
    arr = rsr2.encode_rsr2(rc, np.zeros((7, 5), dtype=np.uint8))
    total = sum(rsr2.repair_systematic_rsr2(rc, arr, l)[1].symbol_count for l in range(5))
    assert Fraction(total, 25 * 7) == Fraction(103, 175)
    assert round(total / 175, 4) == 0.5886


@pytest.mark.parametrize("n,k", [(8, 4), (10, 5), (12, 8), (20, 10)])
def test_repair_bitwise_100_fills(n, k):
    rc = rsr2.build_rsr2(n, k)
    msgs = np.random.default_rng(n * k).integers(0, 256, (rc.alpha, k, 100), dtype=np.uint8)
    arr = rsr2.encode_rsr2(rc, msgs)
    for l in range(k):
        col, _ = rsr2.repair_systematic_rsr2(rc, arr, l)
        assert np.array_equal(col, arr.cells[l])
    for node in range(k, n):
        col, rep = rsr2.repair_parity_rsr2(rc, arr, node)
        assert np.array_equal(col, arr.cells[node])
        assert rep.symbol_count == k * rc.alpha


@pytest.mark.parametrize("n,k", [(20, 10), (30, 15), (40, 31)])
def test_step3_systems_invertible(n, k):
    rc = rsr2.build_rsr2(n, k)
    for l in range(k):
        assert gf.rank(rsr2._step3_matrix(rc, l)) == rc.r - 1


def test_repair_rejects_parity_node():
    rc = rsr2.build_rsr2(8, 4)
    arr = rsr2.encode_rsr2(rc, np.zeros((5, 4), dtype=np.uint8))
    with pytest.raises(ValueError):
        rsr2.repair_systematic_rsr2(rc, arr, 5)


def test_repair_from_downloader_matches_array():
    rc = rsr2.build_rsr2(8, 4)
    msgs = np.random.default_rng(3).integers(0, 256, (5, 4), dtype=np.uint8)
    arr = rsr2.encode_rsr2(rc, msgs)
    dl = framework.Downloader(lambda n, s: arr.cells[n, s], failed=2)
    col, rep = rsr2.repair_systematic_rsr2(rc, dl, 2)
    assert np.array_equal(col, msgs[:, 2])
