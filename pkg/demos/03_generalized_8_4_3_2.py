"""
The generalized code on (8,4) with s=3, p=2
===========================================

Region A (the first s stripes of the systematic nodes) is split into
(r-1)p sums.  Each sum is piggybacked on one Region D cell (parity nodes
2..r, last p stripes).
"""

import numpy as np

from pbcodes import analysis, genpb

gp = genpb.make_params(8, 4, 3, 2)
asg = genpb.build_assignment(gp)

label = lambda cell: "abcde"[cell[1]] + str(cell[0] + 1)
for f, cells in enumerate(asg.cells_of_func):
    node, stripe = asg.placement[f]
    print(f"{' + '.join(sorted(map(label, cells))):8s} -> node {node + 1}, stripe {'abcde'[stripe]}")

msgs = np.random.default_rng(1).integers(0, 256, (5, 4, 32), dtype=np.uint8)
arr = genpb.encode_gen(gp, asg, msgs)
col, rep = genpb.repair_systematic_gen(gp, asg, arr, 0)
assert np.array_equal(col, msgs[:, 0])
print("node 1 repaired from", rep.symbol_count, "symbols")
print("per-symbol ops, piggybacked:", *map(str, rep.average_ops("piggybacked")))
print("per-symbol ops, protected:  ", *map(str, rep.average_ops("protected")))
print("average ratio:", analysis.gamma2(8, 4, 3, 2))
