"""Multi-stripe storage arrays with linear piggybacks.

A :class:`StripeArray` stores ``n x alpha`` cells (row = node, column =
stripe).  Next to the cell values it keeps the cell-coefficient map: row
``node * alpha + stripe`` of ``coeffs`` expresses that cell as a linear
functional of the flattened message, where message symbol ``x`` of stripe
``j`` sits at column ``j * k + x``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import gf, mds
from .errors import DecodeError, SingularMatrixError


def cell_index(alpha, node, stripe):
    return node * alpha + stripe


def base_coeffs(code, alpha):
    """Cell-coefficient map of ``alpha`` plain stripes of ``code``."""
    n, k = code.n, code.k
    G = code.generator()
    C = np.zeros((n * alpha, k * alpha), dtype=np.uint8)
    for node in range(n):
        for j in range(alpha):
            C[node * alpha + j, j * k:(j + 1) * k] = G[node]
    return C


@dataclass(frozen=True, eq=False)
class StripeArray:
    code: mds.CodeParams
    cells: np.ndarray   # (n, alpha) + lane shape
    coeffs: np.ndarray  # (n * alpha, k * alpha)

    @property
    def alpha(self):
        return self.cells.shape[1]

    @property
    def lane_shape(self):
        return self.cells.shape[2:]

    def cell_coeffs(self, node, stripe):
        return self.coeffs[cell_index(self.alpha, node, stripe)]

    def downloader(self, failed):
        return Downloader(lambda node, stripe: self.cells[node, stripe], failed)


def _flatten(code, messages):
    messages = np.asarray(messages, dtype=np.uint8)
    if messages.ndim < 2 or messages.shape[1] != code.k:
        raise ValueError(f"messages must have shape (alpha, {code.k}, ...), got {messages.shape}")
    return messages.reshape((messages.shape[0] * code.k,) + messages.shape[2:])


def realize(code, coeffs, messages):
    """Evaluate a cell-coefficient map on concrete messages."""
    flat = _flatten(code, messages)
    alpha = coeffs.shape[1] // code.k
    if flat.shape[0] != coeffs.shape[1]:
        raise ValueError(f"expected {alpha} messages, got {len(messages)}")
    cells = gf.matmul(coeffs, flat)
    cells = cells.reshape((code.n, alpha) + flat.shape[1:])
    cells.setflags(write=False)
    coeffs = np.array(coeffs, dtype=np.uint8)
    coeffs.setflags(write=False)
    return StripeArray(code, cells, coeffs)


def encode_plain(code, messages):
    """``alpha`` independent instances of the base code, no piggybacks."""
    messages = np.asarray(messages, dtype=np.uint8)
    return realize(code, base_coeffs(code, len(messages)), messages)


def check_piggyback(code, alpha, target, source_coeffs, transform=False):
    node, stripe = target
    k = code.k
    if not 0 <= node < code.n or not 0 <= stripe < alpha:
        raise ValueError(f"target {target} outside the {code.n} x {alpha} array")
    if node < k:
        raise ValueError("systematic cells immutable")
    source_coeffs = np.asarray(source_coeffs, dtype=np.uint8)
    if source_coeffs.shape != (k * alpha,):
        raise ValueError(f"source coefficients must have length {k * alpha}")
    touched = np.nonzero(source_coeffs)[0] // k
    if len(touched) and touched.max() >= stripe and not transform:
        raise ValueError("piggyback causality violation")
    return source_coeffs


def attach_piggyback(array, target, source_coeffs, transform=False):
    """Add ``source_coeffs . message`` onto the parity cell ``target = (node, stripe)``.

    The source may only read stripes before ``target``'s stripe unless
    ``transform`` asserts that the change is part of an invertible per-node
    linear transform of a causal layout.  Returns a new array.
    """
    return attach_piggybacks(array, [(target, source_coeffs, transform)])


def attach_piggybacks(array, plan):
    """Apply several ``(target, source_coeffs, transform)`` attachments at once."""
    code, alpha = array.code, array.alpha
    coeffs = np.array(array.coeffs, copy=True)
    for target, source, transform in plan:
        source = check_piggyback(code, alpha, target, source, transform)
        coeffs[cell_index(alpha, *target)] ^= source
    # cells are a linear image of the message, so rebuild them from the
    # systematic rows rather than patching one cell at a time
    return realize(code, coeffs, array.cells[:code.k].swapaxes(0, 1))


def decode_full(array, available_nodes):
    """Recover all ``alpha`` messages from the cells of ``available_nodes``.

    Solves the cell-coefficient system restricted to the first k available
    nodes.  Returns an array of shape ``(alpha, k) + lane_shape``.
    """
    nodes = sorted(set(available_nodes))
    code, alpha = array.code, array.alpha
    if len(nodes) < code.k:
        raise DecodeError(f"undecodable node set: {len(nodes)} nodes < k={code.k}")
    rows = [cell_index(alpha, node, j) for node in nodes[:code.k] for j in range(alpha)]
    values = np.stack([array.cells[node, j] for node in nodes[:code.k] for j in range(alpha)])
    try:
        flat = gf.solve_linear(array.coeffs[rows], values)
    except SingularMatrixError as exc:
        raise DecodeError(f"undecodable node set {nodes[:code.k]} (rank {exc.rank})") from exc
    return flat.reshape((alpha, code.k) + array.lane_shape)


def decode_recursive(array, available_nodes):
    """Stripe-by-stripe decoding: strip known piggybacks, then MDS-decode.

    Only valid for causal layouts, where each cell depends on its own
    stripe through the base code and otherwise on earlier stripes.
    """
    code, alpha, k = array.code, array.alpha, array.code.k
    nodes = sorted(set(available_nodes))
    if len(nodes) < k:
        raise DecodeError(f"undecodable node set: {len(nodes)} nodes < k={k}")
    G = code.generator()
    decoded = []
    for j in range(alpha):
        known = {}
        for node in nodes:
            row = array.cell_coeffs(node, j)
            if not np.array_equal(row[j * k:(j + 1) * k], G[node]) or row[(j + 1) * k:].any():
                raise ValueError(f"cell ({node}, {j}) is not in causal piggyback form")
            value = np.array(array.cells[node, j], copy=True)
            if j:
                earlier = np.concatenate(decoded)
                value ^= gf.dot(row[:j * k], earlier)
            known[node] = value
        decoded.append(mds.reconstruct(code, {pos: known[pos] for pos in nodes[:k]}))
    return np.stack(decoded)


class Downloader:
    """Fetches surviving cells for one repair and records each transfer once."""

    def __init__(self, fetch, failed):
        self._fetch = fetch
        self.failed = set([failed] if isinstance(failed, (int, np.integer)) else failed)
        self._cache = {}

    def get(self, node, stripe):
        key = (int(node), int(stripe))
        if key[0] in self.failed:
            raise DecodeError(f"node {key[0]} is unavailable")
        if key not in self._cache:
            self._cache[key] = np.asarray(self._fetch(*key), dtype=np.uint8)
        return self._cache[key]

    @property
    def downloaded(self):
        return list(self._cache)


@dataclass
class RepairReport:
    node: int
    downloaded: list = field(default_factory=list)
    mult_count: int = 0
    add_count: int = 0
    # per symbol class: {"piggybacked": OpCounter, ...} and how many symbols fell in it
    ops_by_class: dict = field(default_factory=dict)
    symbols_by_class: dict = field(default_factory=dict)

    @property
    def symbol_count(self):
        return len(self.downloaded)

    def tally(self, kind, counter):
        self.ops_by_class.setdefault(kind, gf.OpCounter())
        self.ops_by_class[kind] += counter
        self.symbols_by_class[kind] = self.symbols_by_class.get(kind, 0) + 1
        self.mult_count += counter.mult
        self.add_count += counter.add

    def average_ops(self, kind):
        """Mean (mult, add) per recovered symbol of one class."""
        from fractions import Fraction

        count = self.symbols_by_class[kind]
        ops = self.ops_by_class[kind]
        return Fraction(ops.mult, count), Fraction(ops.add, count)


def as_downloader(source, node):
    if isinstance(source, Downloader):
        return source
    return source.downloader(node)


def repair_by_decoding(array_coeffs, code, source, node):
    """Rebuild any node by decoding from the k systematic nodes and re-encoding its row.

    ``array_coeffs`` is the cell-coefficient map of the layout; ``source`` is a
    StripeArray or Downloader.  Downloads k symbols per stripe.
    """
    k, alpha = code.k, array_coeffs.shape[1] // code.k
    dl = as_downloader(source, node)
    helpers = [x for x in range(code.n) if x not in dl.failed][:k]
    if len(helpers) < k:
        raise DecodeError(f"undecodable node set: {len(helpers)} nodes < k={k}")
    rows = [cell_index(alpha, x, j) for x in helpers for j in range(alpha)]
    values = np.stack([dl.get(x, j) for x in helpers for j in range(alpha)])
    flat = gf.solve_linear(array_coeffs[rows], values)
    own = array_coeffs[[cell_index(alpha, node, j) for j in range(alpha)]]
    column = gf.matmul(own, flat)
    report = RepairReport(node, dl.downloaded)
    return column, report
