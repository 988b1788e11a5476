"""RSR-II piggybacking code over 2r-3 stripes.

Indices in this module are 0-based for nodes and stripes.  The parity
evaluation index ``i`` runs over 2..r and the node-set index ``j`` over
1..r-1 so the construction reads like the usual notation: parity node
``k + i - 1`` carries encoding vector ``parity[i - 1]``; stripes
``0..r-2`` are protected and ``r-1..2r-4`` are piggybacked.
"""

from dataclasses import dataclass

import numpy as np

from . import gf, mds
from .errors import ConfigError, DecodeError, SingularMatrixError
from .framework import (
    RepairReport,
    as_downloader,
    attach_piggybacks,
    encode_plain,
    repair_by_decoding,
)


@dataclass(frozen=True)
class NodeSets:
    sets: tuple  # tuple of tuples of systematic node indices
    t_l: int
    t_h: int
    t: int

    def index_of(self, node):
        """1-based index j of the set containing ``node``."""
        for j, members in enumerate(self.sets, start=1):
            if node in members:
                return j
        raise ValueError(f"node {node} is not systematic")


def split_nodes(k, parts):
    t_l = k // parts
    t_h = -(-k // parts)
    t = k - parts * t_l
    sets, start = [], 0
    for j in range(parts):
        size = t_h if j < t else t_l
        sets.append(tuple(range(start, start + size)))
        start += size
    return NodeSets(tuple(sets), t_l, t_h, t)


@dataclass(frozen=True, eq=False)
class Rsr2Code:
    code: mds.CodeParams
    node_sets: NodeSets
    selection: dict      # (i, j) -> q_{i,j}, a length-k uint8 vector
    eval_points: dict    # i -> field element used as i in the powers of v_i

    @property
    def r(self):
        return self.code.r

    @property
    def alpha(self):
        return 2 * self.code.r - 3

    def q(self, i, j):
        return self.selection[(i, j)]

    def slot_stripe(self, i, j):
        """Stripe holding q_{i,j} in parity node k+i-1 (j != i-1)."""
        r = self.r
        if j == i - 1:
            return r - 2
        u = j if j <= i - 2 else j - 1
        return r - 2 + u


def build_rsr2(n, k):
    code = mds.make_code(n, k)
    r = code.r
    if r < 3:
        raise ConfigError("RSR-II requires at least 3 parities")
    sets = split_nodes(k, r - 1)
    selection = {}
    for i in range(2, r + 1):
        p_i = code.parity[i - 1]
        for j, members in enumerate(sets.sets, start=1):
            mask = np.zeros(k, dtype=np.uint8)
            mask[list(members)] = 1
            selection[(i, j)] = p_i * mask
    evals = {i: i for i in range(2, r + 1)}
    rc = Rsr2Code(code, sets, selection, evals)
    if __debug__ and n <= 12:
        for node in range(k):
            gf.inverse(_step3_matrix(rc, node))
    return rc


def piggyback_plan(rc):
    """Attachments turning plain stripes into the stored RSR-II layout.

    Stripe r-2 of each node k+i-1 (i >= 2) is the transformed cell
    q_{i,i-1}.a_{r-1} - sum of later plain parities; the later stripes carry
    q_{i,j}.v_i with v_i = a_{r-1} + i a_{r-2} + ... + i^{r-2} a_1.
    """
    code, r, alpha = rc.code, rc.r, rc.alpha
    k = code.k
    plan = []
    for i in range(2, r + 1):
        node = k + i - 1
        p_i = code.parity[i - 1]
        x = rc.eval_points[i]
        # transformed stripe: replace p_i.a_{r-1} by q_{i,i-1}.a_{r-1}, add later parities
        src = np.zeros(k * alpha, dtype=np.uint8)
        src[(r - 2) * k:(r - 1) * k] = p_i ^ rc.q(i, i - 1)
        for m in range(r - 1, alpha):
            src[m * k:(m + 1) * k] = p_i
        plan.append(((node, r - 2), src, True))
        for j in range(1, r):
            if j == i - 1:
                continue
            src = np.zeros(k * alpha, dtype=np.uint8)
            q = rc.q(i, j)
            for m in range(r - 1):
                src[m * k:(m + 1) * k] = gf.scale(gf.power(x, r - 2 - m), q)
            plan.append(((node, rc.slot_stripe(i, j)), src, False))
    return plan


def encode_rsr2(rc, messages):
    messages = np.asarray(messages, dtype=np.uint8)
    if messages.ndim < 2 or messages.shape[:2] != (rc.alpha, rc.code.k):
        raise ValueError(f"RSR-II needs {rc.alpha} messages of length {rc.code.k}")
    return attach_piggybacks(encode_plain(rc.code, messages), piggyback_plan(rc))


def to_piggyback_form(rc, array):
    """Undo the per-node transform so every cell is causal again.

    Adds the later stripes of each node k+i-1 back onto its stripe r-2.
    """
    code, r = rc.code, rc.r
    cells = np.array(array.cells, copy=True)
    coeffs = np.array(array.coeffs, copy=True)
    alpha = rc.alpha
    for node in range(code.k + 1, code.n):
        for m in range(r - 1, alpha):
            cells[node, r - 2] ^= cells[node, m]
            coeffs[node * alpha + r - 2] ^= coeffs[node * alpha + m]
    cells.setflags(write=False)
    coeffs.setflags(write=False)
    return type(array)(code, cells, coeffs)


def _step3_matrix(rc, node):
    r = rc.r
    j = rc.node_sets.index_of(node)
    A = np.zeros((r - 1, r - 1), dtype=np.uint8)
    for row, i in enumerate(range(2, r + 1)):
        p = int(rc.code.parity[i - 1][node])
        if i == j + 1:
            A[row, r - 2] = p
        else:
            for m in range(r - 1):
                A[row, m] = gf.mul(p, gf.power(rc.eval_points[i], r - 2 - m))
    return A


def repair_systematic_rsr2(rc, source, node):
    """Rebuild systematic ``node`` with the three-step piggyback repair.

    ``source`` is the stored StripeArray (the failed row is never read) or a
    Downloader.  Returns ``(column, report)``.
    """
    code, r, alpha = rc.code, rc.r, rc.alpha
    k = code.k
    if not 0 <= node < k:
        raise ValueError(f"node {node} is not systematic")
    dl = as_downloader(source, node)
    report = RepairReport(node)
    column = [None] * alpha
    full = {}

    # 1: piggybacked stripes by plain MDS repair
    for m in range(r - 1, alpha):
        survivors = {x: dl.get(x, m) for x in range(k) if x != node}
        survivors[k] = dl.get(k, m)
        ops = gf.OpCounter()
        column[m] = mds.repair_symbol(code, node, survivors, ops)
        report.tally("piggybacked", ops)
        full[m] = np.stack([column[m] if x == node else survivors[x] for x in range(k)])

    # 2: the r-1 parity cells carrying q_{i,j}, with known parities stripped
    j = rc.node_sets.index_of(node)
    members = [x for x in rc.node_sets.sets[j - 1] if x != node]
    solve_ops = gf.OpCounter()
    rhs = []
    for i in range(2, r + 1):
        p_i = code.parity[i - 1]
        stripe = rc.slot_stripe(i, j)
        value = np.array(dl.get(k + i - 1, stripe), copy=True)
        later = range(r - 1, alpha) if stripe == r - 2 else [stripe]
        for m in later:
            value ^= gf.dot(p_i, full[m])
            solve_ops.mult += k
            solve_ops.add += k
        rhs.append(value)

    # 3: subtract the other protected symbols of the same node set, then solve
    for row, i in enumerate(range(2, r + 1)):
        p_i = code.parity[i - 1]
        x_i = rc.eval_points[i]
        for x in members:
            if i == j + 1:
                terms = [(r - 2, 1)]
            else:
                terms = [(m, gf.power(x_i, r - 2 - m)) for m in range(r - 1)]
            for m, w in terms:
                rhs[row] = rhs[row] ^ gf.scale(gf.mul(int(p_i[x]), w), dl.get(x, m))
                solve_ops.mult += 1
                solve_ops.add += 1
    try:
        solved = gf.solve_linear(_step3_matrix(rc, node), np.stack(rhs), solve_ops)
    except SingularMatrixError as exc:
        raise DecodeError(f"RSR-II repair system singular for node {node}") from exc
    for m in range(r - 1):
        column[m] = solved[m]
    # the solve recovers all r-1 protected symbols jointly; spread its cost
    for m in range(r - 1):
        part = gf.OpCounter(solve_ops.mult // (r - 1), solve_ops.add // (r - 1))
        if m == 0:
            part.mult += solve_ops.mult % (r - 1)
            part.add += solve_ops.add % (r - 1)
        report.tally("protected", part)
    report.downloaded = dl.downloaded
    return np.stack(column), report


def repair_parity_rsr2(rc, array_or_dl, node, coeffs=None):
    """Rebuild a parity node by decoding from the systematic nodes and re-encoding."""
    if coeffs is None:
        coeffs = array_or_dl.coeffs
    return repair_by_decoding(coeffs, rc.code, array_or_dl, node)


def layout_coeffs(rc):
    """Cell-coefficient map of the stored layout, independent of any data."""
    zeros = np.zeros((rc.alpha, rc.code.k), dtype=np.uint8)
    return encode_rsr2(rc, zeros).coeffs
