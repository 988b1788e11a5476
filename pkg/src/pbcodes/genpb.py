"""Generalized piggybacking code with ``s`` protected and ``p`` piggybacked stripes.

Layout (0-based): stripes ``0..s-1`` are protected, ``s..s+p-1`` are
piggybacked.  Region A is the systematic part of the protected stripes,
Region B the systematic part plus first parity row of the piggybacked
stripes, Region C the parity part of the protected stripes, and Region D
parity rows ``k+1..n-1`` of the piggybacked stripes, which carry the
piggyback functions.
"""

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import analysis, gf, mds
from .errors import ConfigError, DecodeError
from .framework import (
    RepairReport,
    as_downloader,
    attach_piggybacks,
    encode_plain,
    repair_by_decoding,
)


@dataclass(frozen=True, eq=False)
class GenParams:
    code: mds.CodeParams
    s: int
    p: int

    @property
    def alpha(self):
        return self.s + self.p

    @property
    def functions(self):
        return (self.code.r - 1) * self.p


def make_params(n, k, s, p):
    if s < 1 or p < 1:
        raise ConfigError(f"need s >= 1 and p >= 1, got s={s}, p={p}")
    code = mds.make_code(n, k)
    if (code.r - 1) * p < s:
        raise ConfigError(
            f"insufficient Region D capacity: (r-1)*p = {(code.r - 1) * p} < s = {s}"
        )
    return GenParams(code, s, p)


@dataclass(frozen=True)
class PiggybackAssignment:
    func_of_cell: dict    # (node, stripe) -> function index, 0-based
    cells_of_func: tuple  # function index -> tuple of (node, stripe)
    placement: tuple      # function index -> (node, stripe) in Region D

    @property
    def sizes(self):
        return tuple(len(c) for c in self.cells_of_func)

    def covering(self, node, s):
        return [self.func_of_cell[(node, i)] for i in range(s)]


def build_assignment(gp):
    """Fill Region A row-wise into the piggybacking array and place its columns.

    Region A cells are taken node by node (all s protected stripes of node 0,
    then node 1, ...) and written row-wise into an array with (r-1)p
    columns; column j is function j.  Function j goes to stripe s + j % p of
    parity node k + 1 + j // p.
    """
    k, r, s, p = gp.code.k, gp.code.r, gp.s, gp.p
    width = gp.functions
    if width < s:
        raise ConfigError("insufficient Region D capacity")
    func_of_cell = {}
    cells = [[] for _ in range(width)]
    for pos in range(k * s):
        node, stripe = divmod(pos, s)
        f = pos % width
        func_of_cell[(node, stripe)] = f
        cells[f].append((node, stripe))
    placement = tuple((k + 1 + f // p, s + f % p) for f in range(width))
    asg = PiggybackAssignment(func_of_cell, tuple(tuple(c) for c in cells), placement)
    for node in range(k):
        cover = asg.covering(node, s)
        if len(set(cover)) != s:
            raise ConfigError(f"node {node} has repeated covering functions {cover}")
    return asg


def size_profile(gp):
    """(t', t'_l, t'_h): t' functions hold t'_h cells, the rest t'_l."""
    width = gp.functions
    ks = gp.code.k * gp.s
    t_l = ks // width
    t_h = -(-ks // width)
    return ks - t_l * width, t_l, t_h


def piggyback_plan(gp, asg):
    k, alpha = gp.code.k, gp.alpha
    plan = []
    for f, members in enumerate(asg.cells_of_func):
        src = np.zeros(k * alpha, dtype=np.uint8)
        for node, stripe in members:
            src[stripe * k + node] = 1
        plan.append((asg.placement[f], src, False))
    return plan


def encode_gen(gp, asg, messages):
    messages = np.asarray(messages, dtype=np.uint8)
    if messages.ndim < 2 or messages.shape[:2] != (gp.alpha, gp.code.k):
        raise ValueError(f"need {gp.alpha} messages of length {gp.code.k}, got {messages.shape}")
    return attach_piggybacks(encode_plain(gp.code, messages), piggyback_plan(gp, asg))


def repair_systematic_gen(gp, asg, source, node):
    """Rebuild systematic ``node``; ``source`` is a StripeArray or Downloader.

    Piggybacked stripes come back through MDS repair over Region B.  Each
    protected symbol is then read out of its function's Region D cell after
    removing the cell's plain parity and the function's other members.
    """
    code, s, p = gp.code, gp.s, gp.p
    k = code.k
    if not 0 <= node < k:
        raise ValueError(f"node {node} is not systematic")
    dl = as_downloader(source, node)
    report = RepairReport(node)
    column = [None] * gp.alpha
    full = {}

    for m in range(s, s + p):
        survivors = {x: dl.get(x, m) for x in range(k) if x != node}
        survivors[k] = dl.get(k, m)
        ops = gf.OpCounter()
        column[m] = mds.repair_symbol(code, node, survivors, ops)
        report.tally("piggybacked", ops)
        full[m] = [column[m] if x == node else survivors[x] for x in range(k)]

    cover = asg.covering(node, s)
    if len(set(cover)) != s:
        raise DecodeError(f"node {node} has repeated covering functions {cover}")
    for stripe in range(s):
        f = asg.func_of_cell[(node, stripe)]
        d_node, d_stripe = asg.placement[f]
        ops = gf.OpCounter()
        value = np.array(dl.get(d_node, d_stripe), copy=True)
        # plain parity of the Region D cell, from the recovered piggybacked message
        enc = code.parity[d_node - k]
        parity = gf.scale(enc[0], full[d_stripe][0])
        ops.mult += 1
        for x in range(1, k):
            parity = parity ^ gf.scale(enc[x], full[d_stripe][x])
            ops.mult += 1
            ops.add += 1
        value ^= parity
        ops.add += 1
        for other in asg.cells_of_func[f]:
            if other == (node, stripe):
                continue
            value ^= dl.get(*other)
            ops.add += 1
        column[stripe] = value
        report.tally("protected", ops)
    report.downloaded = dl.downloaded
    return np.stack(column), report


def repair_parity_gen(gp, array_or_dl, node, coeffs):
    return repair_by_decoding(coeffs, gp.code, array_or_dl, node)


def layout_coeffs(gp, asg):
    zeros = np.zeros((gp.alpha, gp.code.k), dtype=np.uint8)
    return encode_gen(gp, asg, zeros).coeffs


@dataclass(frozen=True)
class RepairOps:
    piggybacked: tuple  # (mult, add) per recovered piggybacked-stripe symbol
    protected: tuple    # average (mult, add) per protected symbol over all functions
    protected_node: tuple  # exact average (mult, add) for this node's protected symbols


def count_repair_ops(gp, asg, node):
    """Closed-form operation counts for repairing systematic ``node``."""
    k, r, s, p = gp.code.k, gp.code.r, gp.s, gp.p
    if not 0 <= node < k:
        raise ValueError(f"node {node} is not systematic")
    sizes = asg.sizes
    piggybacked, protected = analysis.repair_op_counts(k, r, s, p)
    own = [sizes[f] for f in asg.covering(node, s)]
    return RepairOps(
        piggybacked=piggybacked,
        protected=protected,
        protected_node=(k, Fraction(sum(own), s) + k - 1),
    )


def size_histogram(asg):
    return Counter(asg.sizes)
