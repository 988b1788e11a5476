"""A simulated storage cluster with failure injection and exact download accounting.

Each node store holds one cell per (block group, stripe).  A cell is
``cell_size`` bytes; byte q of every cell in a block group belongs to an
independent symbol stream, so the whole group is repaired with one pass and
one ledger entry per cell read.

Node file layout (little-endian): magic ``PBEC``, version u16, n u16, k u16,
s u16, p u16, cell size u32, then the cells ordered by (block group, stripe).
For layouts without a protected/piggybacked split, s is 0 and p is the
stripe count.
"""

import os
import shutil
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, framework, genpb, gf, mds, rsr2
from .errors import ConfigError, StoreError, UnrecoverableError

MAGIC = b"PBEC"
VERSION = 1
HEADER = struct.Struct("<4sHHHHHI")
LAYOUTS = ("mds", "rsr2", "gen")
MANIFEST_NAME = "manifest.txt"


class MemoryStore:
    def __init__(self):
        self.blobs = {}
        self.manifest = None

    def write(self, node, blob):
        self.blobs[node] = bytes(blob)

    def read(self, node):
        try:
            return self.blobs[node]
        except KeyError:
            raise StoreError(node, "store missing") from None

    def exists(self, node):
        return node in self.blobs

    def erase(self, node):
        self.blobs.pop(node, None)

    def write_manifest(self, text):
        self.manifest = text

    def read_manifest(self):
        if self.manifest is None:
            raise FileNotFoundError("no manifest")
        return self.manifest


class DirStore:
    """One directory per node holding a single ``cells.bin`` file."""

    def __init__(self, root):
        self.root = Path(root)

    def node_dir(self, node):
        return self.root / f"node{node:03d}"

    def write(self, node, blob):
        d = self.node_dir(node)
        try:
            d.mkdir(parents=True, exist_ok=True)
            tmp = d / "cells.bin.tmp"
            tmp.write_bytes(blob)
            os.replace(tmp, d / "cells.bin")
        except OSError as exc:
            raise StoreError(node, f"write failed: {exc}") from exc

    def read(self, node):
        try:
            return (self.node_dir(node) / "cells.bin").read_bytes()
        except OSError as exc:
            raise StoreError(node, f"read failed: {exc}") from exc

    def exists(self, node):
        return (self.node_dir(node) / "cells.bin").is_file()

    def erase(self, node):
        shutil.rmtree(self.node_dir(node), ignore_errors=True)

    def write_manifest(self, text):
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / MANIFEST_NAME).write_text(text)

    def read_manifest(self):
        return (self.root / MANIFEST_NAME).read_text()


def format_manifest(entry):
    keys = ("layout", "n", "k", "s", "p", "lane_count", "payload_length", "checksum")
    return "".join(f"{key}={entry[key]}\n" for key in keys)


def parse_manifest(text):
    entry = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        entry[key.strip()] = value.strip()
    for key in ("n", "k", "s", "p", "lane_count", "payload_length"):
        entry[key] = int(entry[key])
    return entry


@dataclass
class BandwidthLedger:
    """Cells read while repairing one node: the same per-group pattern in every block group."""

    node: int
    pattern: list = field(default_factory=list)  # (source node, stripe)
    groups: int = 0

    def reads(self):
        for g in range(self.groups):
            for src, stripe in self.pattern:
                yield src, stripe, g

    @property
    def total(self):
        return len(self.pattern) * self.groups

    def per_node(self):
        counts = {}
        for src, _ in self.pattern:
            counts[src] = counts.get(src, 0) + self.groups
        return counts


@dataclass
class RepairSummary:
    node: int
    report: framework.RepairReport  # one block group's worth
    ledger: BandwidthLedger
    method: str

    @property
    def symbol_count(self):
        return self.ledger.total

    @property
    def mult_count(self):
        return self.report.mult_count * self.ledger.groups

    @property
    def add_count(self):
        return self.report.add_count * self.ledger.groups


class Cluster:
    """n node stores holding one payload encoded with a chosen layout.

    ``layout`` is ``"mds"`` (``alpha`` plain stripes), ``"rsr2"`` or
    ``"gen"`` (needs ``s`` and ``p``).  ``root=None`` keeps stores in memory.
    """

    def __init__(self, layout, n, k, s=None, p=None, root=None, cell_size=1, alpha=1):
        if layout not in LAYOUTS:
            raise ConfigError(f"unknown layout {layout!r}; choose from {LAYOUTS}")
        if cell_size < 1:
            raise ConfigError("cell size must be positive")
        self.layout = layout
        self.cell_size = cell_size
        if layout == "gen":
            if s is None or p is None:
                raise ConfigError("generalized layout needs s and p")
            self.gen = genpb.make_params(n, k, s, p)
            self.assignment = genpb.build_assignment(self.gen)
            self.code = self.gen.code
            self.s, self.p = s, p
            self.coeffs = genpb.layout_coeffs(self.gen, self.assignment)
        elif layout == "rsr2":
            self.rsr = rsr2.build_rsr2(n, k)
            self.code = self.rsr.code
            self.s, self.p = self.code.r - 1, self.code.r - 2
            self.coeffs = rsr2.layout_coeffs(self.rsr)
        else:
            if alpha < 1:
                raise ConfigError("alpha must be positive")
            self.code = mds.make_code(n, k)
            self.s, self.p = 0, alpha
            self.coeffs = framework.base_coeffs(self.code, alpha)
        self.alpha = self.s + self.p
        self.store = MemoryStore() if root is None else DirStore(root)
        self.manifest = None

    @property
    def n(self):
        return self.code.n

    @property
    def k(self):
        return self.code.k

    @classmethod
    def open(cls, root):
        store = DirStore(root)
        try:
            entry = parse_manifest(store.read_manifest())
        except (OSError, KeyError, ValueError) as exc:
            raise StoreError("manifest", f"cannot read manifest under {root}: {exc}") from exc
        cell_size = None
        for node in range(entry["n"]):
            if store.exists(node):
                try:
                    cell_size = _parse_header(store.read(node))[-1]
                    break
                except StoreError:
                    continue
        if cell_size is None:
            raise UnrecoverableError("no readable node stores")
        layout = entry["layout"]
        kwargs = {"root": root, "cell_size": cell_size}
        if layout == "gen":
            kwargs.update(s=entry["s"], p=entry["p"])
        elif layout == "mds":
            kwargs.update(alpha=entry["p"])
        cluster = cls(layout, entry["n"], entry["k"], **kwargs)
        cluster.manifest = entry
        return cluster

    # encoding

    @property
    def group_bytes(self):
        return self.k * self.alpha * self.cell_size

    def _header(self):
        return HEADER.pack(MAGIC, VERSION, self.n, self.k, self.s, self.p, self.cell_size)

    def ingest(self, payload):
        """Encode ``payload`` into the node stores and write the manifest."""
        payload = bytes(payload)
        groups = -(-len(payload) // self.group_bytes)
        buf = np.zeros(groups * self.group_bytes, dtype=np.uint8)
        buf[:len(payload)] = np.frombuffer(payload, dtype=np.uint8)
        # (G, alpha, k, cs) -> (alpha, k, G * cs)
        msgs = buf.reshape(groups, self.alpha, self.k, self.cell_size).transpose(1, 2, 0, 3)
        msgs = msgs.reshape(self.alpha, self.k, groups * self.cell_size)
        array = framework.realize(self.code, self.coeffs, msgs)
        for node in range(self.n):
            self._write_node(node, array.cells[node], groups)
        self.manifest = {
            "layout": self.layout, "n": self.n, "k": self.k, "s": self.s, "p": self.p,
            "lane_count": groups, "payload_length": len(payload),
            "checksum": f"{zlib.crc32(payload):08x}",
        }
        self.store.write_manifest(format_manifest(self.manifest))
        return dict(self.manifest)

    def _write_node(self, node, column, groups):
        # column: (alpha, G * cs) -> records ordered by (group, stripe)
        data = np.asarray(column, dtype=np.uint8).reshape(self.alpha, groups, self.cell_size)
        data = data.transpose(1, 0, 2)
        self.store.write(node, self._header() + data.tobytes())

    def _load_node(self, node):
        """Node content as an (alpha, G * cs) array."""
        blob = self.store.read(node)
        fields = _parse_header(blob, node)
        expect = (self.n, self.k, self.s, self.p, self.cell_size)
        if fields != expect:
            raise StoreError(node, f"header {fields} does not match cluster {expect}")
        groups = self.manifest["lane_count"]
        body = np.frombuffer(blob, dtype=np.uint8, offset=HEADER.size)
        if body.size != groups * self.alpha * self.cell_size:
            raise StoreError(node, f"expected {groups} block groups, found {body.size} bytes")
        data = body.reshape(groups, self.alpha, self.cell_size).transpose(1, 0, 2)
        return data.reshape(self.alpha, groups * self.cell_size)

    # failure handling

    def fail_node(self, node):
        self._check_node(node)
        self.store.erase(node)

    def failed_nodes(self):
        bad = set()
        for node in range(self.n):
            if not self.store.exists(node):
                bad.add(node)
                continue
            try:
                self._load_node(node)
            except StoreError:
                bad.add(node)
        return bad

    @property
    def data_loss(self):
        return len(self.failed_nodes()) > self.code.r

    def _check_node(self, node):
        if not 0 <= node < self.n:
            raise ConfigError(f"node {node} outside 0..{self.n - 1}")

    def _require_manifest(self):
        if self.manifest is None:
            self.manifest = parse_manifest(self.store.read_manifest())

    def repair(self, node, force=False):
        """Rebuild ``node`` and return a RepairSummary with its ledger.

        A healthy node is left alone (empty ledger) unless ``force`` is set.
        """
        self._check_node(node)
        self._require_manifest()
        failed = self.failed_nodes()
        groups = self.manifest["lane_count"]
        if node not in failed and not force:
            return RepairSummary(node, framework.RepairReport(node), BandwidthLedger(node, [], groups), "none")
        failed.add(node)
        if len(failed) > self.code.r:
            raise UnrecoverableError(
                f"unrecoverable: {len(failed)} nodes lost, code tolerates {self.code.r}"
            )
        loaded = {}

        def fetch(src, stripe):
            if src not in loaded:
                loaded[src] = self._load_node(src)
            return loaded[src][stripe]

        dl = framework.Downloader(fetch, failed)
        if groups == 0:
            column = np.zeros((self.alpha, 0), dtype=np.uint8)
            report, method = framework.RepairReport(node), "empty"
        elif len(failed) == 1 and node < self.k:
            column, report = self._repair_systematic(dl, node)
            method = self.layout
        else:
            column, report = framework.repair_by_decoding(self.coeffs, self.code, dl, node)
            method = "decode"
        self._write_node(node, column, groups)
        ledger = BandwidthLedger(node, list(report.downloaded), groups)
        return RepairSummary(node, report, ledger, method)

    def _repair_systematic(self, dl, node):
        if self.layout == "gen":
            return genpb.repair_systematic_gen(self.gen, self.assignment, dl, node)
        if self.layout == "rsr2":
            return rsr2.repair_systematic_rsr2(self.rsr, dl, node)
        return repair_systematic_mds(self.code, self.alpha, dl, node)

    # reading back

    def read_payload(self):
        self._require_manifest()
        groups = self.manifest["lane_count"]
        alive = sorted(set(range(self.n)) - self.failed_nodes())
        if len(alive) < self.k:
            raise UnrecoverableError(f"unrecoverable: only {len(alive)} nodes readable, need {self.k}")
        if alive[:self.k] == list(range(self.k)):
            msgs = np.stack([self._load_node(x) for x in range(self.k)], axis=1)
        else:
            cells = np.zeros((self.n, self.alpha, groups * self.cell_size), dtype=np.uint8)
            for x in alive[:self.k]:
                cells[x] = self._load_node(x)
            array = framework.StripeArray(self.code, cells, self.coeffs)
            msgs = framework.decode_full(array, alive[:self.k])
        # (alpha, k, G * cs) -> (G, alpha, k, cs)
        msgs = msgs.reshape(self.alpha, self.k, groups, self.cell_size).transpose(2, 0, 1, 3)
        return msgs.tobytes()[:self.manifest["payload_length"]]

    def verify(self):
        """Return a list of problems; empty when every node is present and consistent."""
        self._require_manifest()
        problems = [f"node {x} unavailable" for x in sorted(self.failed_nodes())]
        if problems:
            return problems
        payload = self.read_payload()
        if f"{zlib.crc32(payload):08x}" != self.manifest["checksum"]:
            problems.append("payload checksum mismatch")
        msgs = np.stack([self._load_node(x) for x in range(self.k)], axis=1)
        expect = framework.realize(self.code, self.coeffs, msgs).cells
        for node in range(self.k, self.n):
            if not np.array_equal(expect[node], self._load_node(node)):
                problems.append(f"node {node} parity mismatch")
        return problems


def _parse_header(blob, node="?"):
    if len(blob) < HEADER.size:
        raise StoreError(node, "truncated header")
    magic, version, n, k, s, p, cell = HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise StoreError(node, f"bad magic {magic!r}")
    if version != VERSION:
        raise StoreError(node, f"unsupported version {version}")
    return n, k, s, p, cell


def repair_systematic_mds(code, alpha, source, node):
    """Plain-stripe repair: k symbols per stripe."""
    dl = framework.as_downloader(source, node)
    report = framework.RepairReport(node)
    column = []
    for m in range(alpha):
        survivors = {x: dl.get(x, m) for x in range(code.k) if x != node}
        survivors[code.k] = dl.get(code.k, m)
        ops = gf.OpCounter()
        column.append(mds.repair_symbol(code, node, survivors, ops))
        report.tally("piggybacked", ops)
    report.downloaded = dl.downloaded
    return np.stack(column), report


@dataclass
class FormulaCheck:
    layout: str
    n: int
    k: int
    s: int
    p: int
    measured_total: int
    analytic_total: int
    measured_ratio: object
    analytic_ratio: object
    restored: bool

    @property
    def ok(self):
        return (self.restored and self.measured_total == self.analytic_total
                and self.measured_ratio == self.analytic_ratio)


def measure_systematic_repairs(cluster):
    """Fail and repair each systematic node in turn; return (total symbols, all restored)."""
    total, restored = 0, True
    for node in range(cluster.k):
        before = cluster.store.read(node)
        cluster.fail_node(node)
        summary = cluster.repair(node)
        total += summary.symbol_count
        restored &= cluster.store.read(node) == before
    return total, restored


def validate_formulas(grid, seed=0):
    """Measure average systematic repair downloads and compare with the closed forms.

    ``grid`` items are ``(layout, n, k)`` or ``("gen", n, k, s, p)``.  Each
    configuration stores one block group.  Mismatches are reported, not raised.
    """
    from fractions import Fraction

    rng = np.random.default_rng(seed)
    out = []
    for item in grid:
        layout, n, k = item[:3]
        s, p = (item[3], item[4]) if layout == "gen" else (None, None)
        cluster = Cluster(layout, n, k, s=s, p=p)
        cluster.ingest(rng.integers(0, 256, cluster.group_bytes, dtype=np.uint8).tobytes())
        total, restored = measure_systematic_repairs(cluster)
        groups = cluster.manifest["lane_count"]
        if layout == "gen":
            want = analysis.gen_total_download(n, k, s, p)
            ratio = analysis.gamma2(n, k, s, p)
        elif layout == "rsr2":
            want = analysis.rsr2_total_download(n, k)
            ratio = analysis.gamma1(n, k)
        else:
            want = k * k * cluster.alpha
            ratio = Fraction(1)
        out.append(FormulaCheck(
            layout, n, k, cluster.s, cluster.p,
            total // groups, want,
            Fraction(total, groups * k * k * cluster.alpha), ratio, restored,
        ))
    return out


def default_grid(max_stripes=6):
    grid = []
    for n, k in ((8, 4), (10, 5), (12, 8), (20, 10)):
        r = n - k
        grid.append(("mds", n, k))
        grid.append(("rsr2", n, k))
        for p in range(1, max_stripes):
            for s in range(1, max_stripes - p + 1):
                if (r - 1) * p >= s:
                    grid.append(("gen", n, k, s, p))
    for n, k in ((7, 4), (9, 6), (11, 7)):
        grid.append(("rsr2", n, k))
    return grid
