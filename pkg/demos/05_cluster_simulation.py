"""
A simulated cluster: fail a node, repair it, count the bytes
============================================================
"""

import shutil
import tempfile
from pathlib import Path

import numpy as np

from pbcodes import simnode

root = Path(tempfile.mkdtemp())
payload = np.random.default_rng(7).integers(0, 256, 200_000, dtype=np.uint8).tobytes()

for layout, kw in [("mds", {"alpha": 5}), ("rsr2", {}), ("gen", {"s": 3, "p": 2})]:
    where = root / layout
    c = simnode.Cluster(layout, 8, 4, root=where, cell_size=16, **kw)
    c.ingest(payload)
    shutil.rmtree(where / "node001")
    summary = c.repair(1)
    per_byte = summary.symbol_count * c.cell_size / (c.alpha * c.cell_size * summary.ledger.groups)
    print(f"{layout:5s} repaired node 1: {summary.symbol_count * c.cell_size} bytes read, "
          f"{per_byte:.2f} bytes per lost byte, verify={c.verify() or 'ok'}")
    assert c.read_payload() == payload

# the full grid check behind the closed forms
bad = [r for r in simnode.validate_formulas(simnode.default_grid()) if not r.ok]
print("formula mismatches:", len(bad))
shutil.rmtree(root)
