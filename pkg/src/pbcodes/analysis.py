"""Closed-form repair ratios, bounds and optimizers.

Ratios are exact ``Fraction`` values; decimals appear only when rendering.
"""

import csv
import io
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction


def _split(total, parts):
    t_l = total // parts
    t_h = -(-total // parts)
    return total - parts * t_l, t_l, t_h


def _check_rsr2(n, k):
    r = n - k
    if k < 1 or r < 3:
        raise ValueError(f"RSR-II ratio needs r = n - k >= 3, got n={n}, k={k}")
    return r


def _check_gen(n, k, s, p):
    r = n - k
    if k < 1 or r < 2 or s < 1 or p < 1 or (r - 1) * p < s:
        raise ValueError(f"infeasible generalized parameters n={n}, k={k}, s={s}, p={p}")
    return r


@dataclass(frozen=True)
class RatioBreakdown:
    p_p: Fraction
    eta_p: Fraction
    eta_np: Fraction
    gamma: Fraction


# RSR-II

def rsr2_repair_download(n, k, set_size):
    """Symbols downloaded to repair one systematic node whose node set has ``set_size`` members."""
    r = _check_rsr2(n, k)
    return (r - 2) * k + (r - 1) + (r - 1) * (set_size - 1)


def rsr2_total_download(n, k):
    r = _check_rsr2(n, k)
    t, t_l, t_h = _split(k, r - 1)
    return t * t_h * rsr2_repair_download(n, k, t_h) + (r - 1 - t) * t_l * rsr2_repair_download(n, k, t_l)


def gamma1(n, k):
    """Average systematic repair ratio of RSR-II."""
    r = _check_rsr2(n, k)
    t, t_l, t_h = _split(k, r - 1)
    return Fraction(k * k * (r - 2) + (t * t_h ** 2 + (r - 1 - t) * t_l ** 2) * (r - 1),
                    k * k * (2 * r - 3))


def gamma1_breakdown(n, k):
    r = _check_rsr2(n, k)
    t, t_l, t_h = _split(k, r - 1)
    p_p = Fraction(r - 1, 2 * r - 3)
    eta_p = Fraction(t * t_h ** 2 + (r - 1 - t) * t_l ** 2, k * k)
    return RatioBreakdown(p_p, eta_p, Fraction(1), (1 - p_p) + p_p * eta_p)


def min_gamma1(r):
    return Fraction(r - 1, 2 * r - 3)


# generalized piggybacking

def function_sizes(k, r, s, p):
    """Region A cell counts per piggyback function: t' of size t'_h then the rest of size t'_l."""
    width = (r - 1) * p
    t, t_l, t_h = _split(k * s, width)
    return [t_h] * t + [t_l] * (width - t)


def gen_total_download(n, k, s, p):
    """Symbols downloaded to repair each systematic node once: k^2 p + sum n_i^2."""
    r = _check_gen(n, k, s, p)
    return k * k * p + sum(x * x for x in function_sizes(k, r, s, p))


def gamma2(n, k, s, p):
    r = _check_gen(n, k, s, p)
    width = (r - 1) * p
    t = k * s - (k * s // width) * width
    return (k * k * p + Fraction(k * k * s * s, width) + Fraction(t * (width - t), width)) / (k * k * (s + p))


def gamma2_breakdown(n, k, s, p):
    r = _check_gen(n, k, s, p)
    p_p = Fraction(s, s + p)
    sizes = function_sizes(k, r, s, p)
    eta_p = Fraction(sum(x * x for x in sizes), k * k * s)
    return RatioBreakdown(p_p, eta_p, Fraction(1), (1 - p_p) + p_p * eta_p)


def gamma_low(p_p, r):
    return (1 - p_p) + p_p * p_p / ((1 - p_p) * (r - 1))


def gamma_up(p_p, r, k):
    if isinstance(p_p, Fraction):
        corr = Fraction(r - 1, 4 * k * k)
    else:
        corr = (r - 1) / (4 * k * k)
    return (1 - p_p) * (1 + corr) + p_p * p_p / ((1 - p_p) * (r - 1))


def bounds(n, k, s, p):
    r = _check_gen(n, k, s, p)
    p_p = Fraction(s, s + p)
    return gamma_low(p_p, r), gamma_up(p_p, r, k)


def argmin_gamma_low(r):
    return 1 - 1 / math.sqrt(r)


def min_gamma_low(r):
    return 2 / (math.sqrt(r) + 1)


def argmin_gamma_up(r, k):
    return 1 - 1 / math.sqrt(r + (r - 1) ** 2 / (4 * k * k))


def min_gamma_up(r, k):
    return (-2 + 2 * math.sqrt(r + (r - 1) ** 2 / (4 * k * k))) / (r - 1)


def optimize_sp(n, k, max_stripes=32):
    """Feasible (s, p) with s + p <= max_stripes minimizing gamma2.

    Ties go to the smaller stripe count, then the smaller p.
    """
    r = n - k
    if max_stripes < 2:
        raise ValueError("max_stripes must be at least 2")
    best = None
    for p in range(1, max_stripes):
        for s in range(1, max_stripes - p + 1):
            if (r - 1) * p < s:
                continue
            key = (gamma2(n, k, s, p), s + p, p)
            if best is None or key < best[0]:
                best = (key, s, p)
    if best is None:
        raise ValueError(f"no feasible (s, p) for n={n}, k={k}")
    return best[1], best[2], best[0][0]


# MSR baseline

def msr_bandwidth(M, d, k):
    if d < k:
        raise ValueError(f"helper count d={d} below k={k}")
    return Fraction(M * d, k * (d - k + 1))


def gamma_msr(n, k, d=None):
    """MSR repair ratio with ``d`` helpers (default n-1); equals 2/r - 1/r^2 when k = r."""
    if d is None:
        d = n - 1
    return msr_bandwidth(1, d, k)


def gamma_msr_rate_half(r):
    return Fraction(2, r) - Fraction(1, r * r)


# operation counts

def repair_op_counts(k, r, s, p):
    """Per-symbol (mult, add) for MDS repair and for solving a piggyback sum."""
    return (k, k - 1), (k, Fraction(k * s, (r - 1) * p) + k - 1)


# reporting

COLUMNS = ("n", "k", "r", "s", "p", "stripes", "gamma1", "gamma2", "gamma_low", "gamma_up", "gamma_msr")


def fmt4(x):
    """Render a ratio with 4 fraction digits, rounding half to even."""
    if x is None:
        return ""
    if isinstance(x, float):
        x = Fraction(x)
    with localcontext() as ctx:
        ctx.prec = 50
        value = Decimal(x.numerator) / Decimal(x.denominator)
        return str(value.quantize(Decimal("0.0001"), rounding=ROUND_HALF_EVEN))


def table_row(n, k, s=None, p=None, max_stripes=32):
    r = n - k
    if s is None or p is None:
        s, p, _ = optimize_sp(n, k, max_stripes)
    low, up = bounds(n, k, s, p)
    return {
        "n": n, "k": k, "r": r, "s": s, "p": p, "stripes": s + p,
        "gamma1": gamma1(n, k) if r >= 3 else None,
        "gamma2": gamma2(n, k, s, p),
        "gamma_low": low,
        "gamma_up": up,
        "gamma_msr": gamma_msr(n, k),
    }


def emit_tables(configs, max_stripes=32):
    """One row per ``(n, k)`` or ``(n, k, s, p)`` configuration."""
    return [table_row(*cfg, max_stripes=max_stripes) for cfg in configs]


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow([row[c] if c in ("n", "k", "r", "s", "p", "stripes") else fmt4(row[c]) for c in COLUMNS])
    return buf.getvalue()


def bound_curves(r, k, samples=99):
    """Gamma_low and Gamma_up sampled at p_p = i/(samples+1), i = 1..samples."""
    out = []
    for i in range(1, samples + 1):
        pp = i / (samples + 1)
        out.append((pp, gamma_low(pp, r), gamma_up(pp, r, k)))
    return out


def min_curves(r_values):
    """Per r at rate 1/2 (k = r): min gamma1, min Gamma_low, min Gamma_up and the MSR ratio."""
    return [
        (r, float(min_gamma1(r)), min_gamma_low(r), min_gamma_up(r, r), float(gamma_msr_rate_half(r)))
        for r in r_values
        if r >= 2
    ]

