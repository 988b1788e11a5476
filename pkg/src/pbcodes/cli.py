"""Command-line entry point: encode, decode, fail, repair, verify, analyze, sweep.

Exit codes: 0 success, 2 parameter error, 3 unrecoverable data, 4 I/O error.
"""

import argparse
import sys
from pathlib import Path

from . import analysis, genpb, mds, rsr2, simnode
from .errors import ConfigError, DecodeError, StoreError, UnrecoverableError

EXIT_OK, EXIT_PARAM, EXIT_LOST, EXIT_IO = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, code, message):
        self.code = code
        super().__init__(message)


def _validate_scheme(args):
    """Check scheme parameters before touching the filesystem."""
    if args.n is None or args.k is None:
        raise ConfigError("--n and --k are required")
    if args.scheme == "gen":
        if args.s is None or args.p is None:
            raise ConfigError("scheme gen needs --s and --p")
        genpb.build_assignment(genpb.make_params(args.n, args.k, args.s, args.p))
    elif args.scheme == "rsr2":
        rsr2.build_rsr2(args.n, args.k)
    else:
        mds.make_code(args.n, args.k)


def cmd_encode(args):
    _validate_scheme(args)
    try:
        payload = Path(args.input).read_bytes()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {args.input}: {exc}") from exc
    cluster = simnode.Cluster(args.scheme, args.n, args.k, s=args.s, p=args.p,
                              root=args.cluster, cell_size=args.cell_size)
    entry = cluster.ingest(payload)
    print(f"encoded {entry['payload_length']} bytes into {entry['lane_count']} block groups "
          f"across {cluster.n} nodes ({args.scheme})")
    return EXIT_OK


def cmd_decode(args):
    cluster = simnode.Cluster.open(args.cluster)
    data = cluster.read_payload()
    try:
        Path(args.output).write_bytes(data)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {args.output}: {exc}") from exc
    print(f"decoded {len(data)} bytes")
    return EXIT_OK


def cmd_fail(args):
    cluster = simnode.Cluster.open(args.cluster)
    cluster.fail_node(args.node)
    print(f"node {args.node} erased")
    return EXIT_OK


def cmd_repair(args):
    cluster = simnode.Cluster.open(args.cluster)
    summary = cluster.repair(args.node, force=args.force)
    if summary.method == "none":
        print(f"node {args.node}: nothing to repair")
        return EXIT_OK
    per_group = len(summary.ledger.pattern)
    print(f"node {args.node} repaired ({summary.method})")
    print(f"downloaded: {summary.symbol_count} symbols "
          f"({per_group} per block group, {summary.ledger.groups} block groups)")
    print(f"multiplications: {summary.mult_count}")
    print(f"additions: {summary.add_count}")
    return EXIT_OK


def cmd_verify(args):
    cluster = simnode.Cluster.open(args.cluster)
    problems = cluster.verify()
    if problems:
        for line in problems:
            print(f"error: {line}")
        return EXIT_LOST if cluster.data_loss else EXIT_IO
    print("ok")
    return EXIT_OK


def cmd_analyze(args):
    n = args.n if args.n is not None else args.n_pos
    k = args.k if args.k is not None else args.k_pos
    if n is None or k is None:
        raise ConfigError("analyze needs n and k")
    if not 1 <= k < n:
        raise ConfigError(f"need 1 <= k < n, got n={n}, k={k}")
    r = n - k
    s, p, best = analysis.optimize_sp(n, k, args.max_stripes)
    configs = [(n, k, s, p)]
    if args.s is not None and args.p is not None and (args.s, args.p) != (s, p):
        configs.insert(0, (n, k, args.s, args.p))
    rows = analysis.emit_tables(configs, args.max_stripes)
    if args.format == "csv":
        sys.stdout.write(analysis.rows_to_csv(rows))
    else:
        for row in rows:
            print(" ".join(
                f"{c}={row[c] if c in ('n', 'k', 'r', 's', 'p', 'stripes') else analysis.fmt4(row[c])}"
                for c in analysis.COLUMNS
            ))
        print(f"optimum: s={s} p={p} gamma2={analysis.fmt4(best)} (max stripes {args.max_stripes})")
    if args.sweep:
        print("p_p,gamma_low,gamma_up")
        for pp, low, up in analysis.bound_curves(r, k, args.samples):
            print(f"{pp:.4f},{analysis.fmt4(low)},{analysis.fmt4(up)}")
    return EXIT_OK


def cmd_sweep(args):
    results = simnode.validate_formulas(simnode.default_grid(args.max_stripes))
    print("layout,n,k,s,p,measured_total,analytic_total,measured_ratio,analytic_ratio,ok")
    bad = 0
    for res in results:
        bad += not res.ok
        print(f"{res.layout},{res.n},{res.k},{res.s},{res.p},{res.measured_total},"
              f"{res.analytic_total},{analysis.fmt4(res.measured_ratio)},"
              f"{analysis.fmt4(res.analytic_ratio)},{'yes' if res.ok else 'NO'}")
    if bad:
        print(f"error: {bad} configurations disagree with the closed forms")
        return EXIT_LOST
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_PARAM)


def build_parser():
    parser = _Parser(prog="pbcodes", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def scheme_args(sp):
        sp.add_argument("--scheme", choices=simnode.LAYOUTS, default="gen")
        sp.add_argument("--n", type=int)
        sp.add_argument("--k", type=int)
        sp.add_argument("--s", type=int)
        sp.add_argument("--p", type=int)

    sp = sub.add_parser("encode", help="encode a file into a cluster directory")
    scheme_args(sp)
    sp.add_argument("--input", required=True)
    sp.add_argument("--cluster", required=True)
    sp.add_argument("--cell-size", type=int, default=1)
    sp.set_defaults(func=cmd_encode)

    sp = sub.add_parser("decode", help="read the payload back out of a cluster")
    sp.add_argument("--cluster", required=True)
    sp.add_argument("--output", required=True)
    sp.set_defaults(func=cmd_decode)

    sp = sub.add_parser("fail", help="erase one node store")
    sp.add_argument("--cluster", required=True)
    sp.add_argument("--node", type=int, required=True)
    sp.set_defaults(func=cmd_fail)

    sp = sub.add_parser("repair", help="rebuild one node and report its download")
    sp.add_argument("--cluster", required=True)
    sp.add_argument("--node", type=int, required=True)
    sp.add_argument("--force", action="store_true")
    sp.set_defaults(func=cmd_repair)

    sp = sub.add_parser("verify", help="check every node and the payload checksum")
    sp.add_argument("--cluster", required=True)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("analyze", help="repair ratios, bounds and the (s, p) optimum")
    sp.add_argument("n_pos", nargs="?", type=int, metavar="n")
    sp.add_argument("k_pos", nargs="?", type=int, metavar="k")
    scheme_args(sp)
    sp.add_argument("--max-stripes", type=int, default=32)
    sp.add_argument("--format", choices=("csv", "plain"), default="plain")
    sp.add_argument("--sweep", action="store_true", help="also print Gamma_low/Gamma_up samples")
    sp.add_argument("--samples", type=int, default=99)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("sweep", help="measure repair downloads on a grid and compare")
    sp.add_argument("--max-stripes", type=int, default=6)
    sp.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_PARAM
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except UnrecoverableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LOST
    except (StoreError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except DecodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LOST


if __name__ == "__main__":
    sys.exit(main())
