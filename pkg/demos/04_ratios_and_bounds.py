"""
Repair ratios at rate 1/2, and the bounds
=========================================
"""

from pbcodes import analysis

rows = [(10, 5, 1, 1), (20, 10, 2, 1), (30, 15, 3, 1), (40, 20, 4, 1),
        (50, 25, 4, 1), (80, 40, 5, 1), (200, 100, 9, 1)]
print(analysis.rows_to_csv(analysis.emit_tables(rows)))

# the optimizer may find more stripes pay off
for n, k in [(20, 10), (200, 100)]:
    s, p, g = analysis.optimize_sp(n, k, 32)
    print(f"({n},{k}) best with <= 32 stripes: s={s} p={p} ratio={analysis.fmt4(g)}")

print("\nr    min gamma1  min G_low  min G_up  MSR")
for r, g1, lo, up, msr in analysis.min_curves([3, 5, 10, 20, 50, 100]):
    print(f"{r:<4d} {g1:.4f}      {lo:.4f}     {up:.4f}    {msr:.4f}")
