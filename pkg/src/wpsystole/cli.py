"""
The ``wp`` command.

Exit codes: 0 success, 1 usage error, 2 contract violation (including a
failed verification suite), 3 budget or resource error.
"""
import argparse
import math
import sys

import numpy as np

from . import hypgeom, moments, verify
from .config import load_config
from .errors import BudgetExceeded, ContractViolation, MissingVolume, QuadratureError
from .quadrature import MomentReport
from .reporting import render, rows_from_reports
from .volumes import VolumeTable


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="INI file with [wp] and [constants] sections")
    p.add_argument("--budget", type=int, help="largest 2g-2+n in the volume table")
    p.add_argument("--convention", choices=["half", "full"], help="V_{1,1} normalization")
    p.add_argument("--precision", type=int, help="bits for numeric volume evaluation")
    p.add_argument("--seed", type=int, help="Monte Carlo seed")
    p.add_argument("--threads", type=int, help="Monte Carlo worker threads")
    p.add_argument("--table-path", dest="table_path", help="persistent volume table")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.add_argument("--format", choices=["csv", "json"], help="report format")
    p.add_argument("--constant", action="append", default=[], metavar="NAME=VALUE",
                   help="override an envelope constant (repeatable)")
    return p


def build_parser():
    common = _common()
    parser = _Parser(prog="wp", description="Weil-Petersson volumes and figure-eight moments")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("volume", parents=[common], help="exact volume polynomial")
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--boundaries", type=int, required=True)
    p.add_argument("--lengths", help="comma-separated boundary lengths")

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", choices=verify.SUITES)
    p.add_argument("--gmax", type=int, default=2)
    p.add_argument("--complexity", type=int, help="cap on 2g-2+n (defaults to the budget)")
    p.add_argument("--quick", action="store_true", help="fewer Monte Carlo comparisons")

    p = sub.add_parser("f8", parents=[common], help="figure-eight length")
    for k in ("x", "y", "z"):
        p.add_argument(f"--{k}", type=float, required=True)

    p = sub.add_parser("mcshane", parents=[common], help="McShane-Mirzakhani kernels")
    p.add_argument("--which", choices=["D", "R"], required=True)
    for k in ("x", "y", "z"):
        p.add_argument(f"--{k}", type=float, required=True)

    p = sub.add_parser("moment", parents=[common], help="expectations")
    p.add_argument("kind", choices=["f8", "f8-small", "f8-total", "nstar", "B"])
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--length", type=float, required=True)
    p.add_argument("--mode", default="auto")
    p.add_argument("--samples", type=int, default=10 ** 6)

    p = sub.add_parser("bound", parents=[common], help="second-moment bounds")
    p.add_argument("kind", choices=["c12", "c04", "cgeq3", "D", "A"])
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--length", type=float, required=True)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--mode", choices=["envelope", "quadrature"], default="envelope")

    p = sub.add_parser("pipeline", parents=[common], help="window probability bounds")
    p.add_argument("--gmin", type=float, default=1e4)
    p.add_argument("--gmax", type=float, default=1e10)
    p.add_argument("--gsteps", type=int, default=7)
    p.add_argument("--omega", choices=["loglog", "constant", "table"], default="loglog")
    p.add_argument("--omega-a", type=float, default=1.0)
    p.add_argument("--omega-table", help="g=omega pairs, comma-separated")
    p.add_argument("--eps", type=float, default=0.1)

    p = sub.add_parser("check", parents=[common], help="calculus checks")
    p.add_argument("what", choices=["cond"])
    p.add_argument("--length", type=float, required=True)
    return parser


def _constants(items):
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise ContractViolation(f"constant {item!r} is not NAME=VALUE")
        out[name.strip()] = float(value)
    return out


def _config(args):
    overrides = {k: getattr(args, k) for k in
                 ("budget", "convention", "precision", "seed", "threads", "table_path",
                  "output", "format")}
    overrides["constants"] = _constants(args.constant)
    return load_config(args.config, overrides)


def _table(cfg):
    return VolumeTable(budget=cfg.budget, convention=cfg.v11_convention,
                       path=cfg.table_path or None)


def _emit(text, cfg):
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _number(x):
    return repr(float(x))


def _cmd_volume(args, cfg):
    table = _table(cfg)
    g, n = args.genus, args.boundaries
    V = table.volume_polynomial(g, n) if n else table.closed_volume(g)
    if args.lengths is None:
        return str(V) + "\n"
    lengths = [float(v) for v in args.lengths.split(",")] if args.lengths else []
    if len(lengths) != n:
        raise ContractViolation(f"expected {n} lengths, got {len(lengths)}")
    return str(V.evaluate_numeric(lengths, cfg.precision)) + "\n"


def _cmd_verify(args, cfg):
    report = verify.run_suite(args.suite, cfg.snapshot(), gmax=args.gmax, budget=cfg.budget,
                              convention=cfg.v11_convention, complexity=args.complexity,
                              seed=cfg.seed or 1, quick=args.quick)
    return report.to_json(), (0 if report.passed else 2)


def _cmd_moment(args, cfg):
    table = _table(cfg)
    g, L, mode = args.genus, args.length, args.mode
    if args.kind == "f8":
        r = moments.E_f8_g23(g, L, mode, table, samples=args.samples, seed=cfg.seed,
                             threads=cfg.threads)
    elif args.kind == "f8-small":
        r = moments.E_f8_small_terms(g, L, mode, table, cfg.constants, samples=args.samples,
                                     seed=cfg.seed)
    elif args.kind == "f8-total":
        r = moments.E_f8_total(g, L, table, cfg.constants)
    elif args.kind == "nstar":
        r = moments.E_nstar(g, L, mode, table, samples=args.samples, seed=cfg.seed)
    else:
        r = moments.E_B(g, L, mode, table)
    return [r]


def _cmd_bound(args, cfg):
    table = _table(cfg)
    g, L = args.genus, args.length
    if args.kind == "cgeq3":
        return [moments.bound_C_geq3(g, L, args.eps, cfg.constants)]
    if args.kind == "A":
        return [MomentReport(moments.bound_A(g, L), 0.0, "asymptotic", {}, g, L)]
    fn = {"c12": moments.bound_C12, "c04": moments.bound_C04, "D": moments.bound_D}[args.kind]
    return [fn(g, L, args.mode, table, cfg.constants)]


def _omega(args):
    table = None
    if args.omega_table:
        table = {}
        for item in args.omega_table.split(","):
            k, _, v = item.partition("=")
            table[float(k)] = float(v)
    return moments.OmegaSchedule(args.omega, args.omega_a, table)


def _cmd_pipeline(args, cfg):
    if not 16 <= args.gmin <= args.gmax or args.gsteps < 1:
        raise ContractViolation("need 16 <= gmin <= gmax and gsteps >= 1")
    omega = _omega(args)
    gs = sorted({int(round(g)) for g in np.logspace(math.log10(args.gmin), math.log10(args.gmax),
                                                     args.gsteps)})
    rows = []
    for g in gs:
        lower, upper, rep = moments.window_probability(g, omega, cfg.constants, args.eps)
        rep.notes = omega.validity(gs) + rep.notes
        base = rows_from_reports([rep])[0]
        comp = rep.components
        for mode, value, L in (("lower_tail", lower, comp["L_minus"]),
                               ("upper_tail", upper, comp["L_plus"])):
            rows.append(dict(base, mode=mode, value=value, err=0.0, L=L))
    return rows


def _cmd_check(args, cfg):
    r = moments.cond_change_of_vars_check(args.length)
    rows = []
    for mode, value, err in (("direct", r.direct, r.direct_error),
                             ("iterated", r.iterated, r.iterated_error),
                             ("closed", r.closed, 0.0)):
        rows.append({"g": None, "L": r.L, "mode": mode, "value": value, "err": err,
                     "constants": {}, "notes": [], "components": {}, "omega": None})
    rows[1]["components"] = {"direct_vs_iterated": r.direct_vs_iterated,
                             "scaled_remainder": r.scaled_remainder, "passed": r.passed}
    return rows


def run_command(argv):
    """Parse ``argv``, run the subcommand, and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        code = 0
        if args.command == "volume":
            text = _cmd_volume(args, cfg)
        elif args.command == "verify":
            text, code = _cmd_verify(args, cfg)
        elif args.command == "f8":
            text = _number(hypgeom.figure_eight_length(args.x, args.y, args.z)) + "\n"
        elif args.command == "mcshane":
            fn = hypgeom.mcshane_D if args.which == "D" else hypgeom.mcshane_R
            text = _number(fn(args.x, args.y, args.z)) + "\n"
        else:
            handler = {"moment": _cmd_moment, "bound": _cmd_bound,
                       "pipeline": _cmd_pipeline, "check": _cmd_check}[args.command]
            rows = handler(args, cfg)
            if rows and not isinstance(rows[0], dict):
                rows = rows_from_reports(rows)
            text = render(rows, cfg.snapshot(), cfg.format)
        _emit(text, cfg)
        return code
    except (BudgetExceeded, MissingVolume, QuadratureError, MemoryError, OSError) as exc:
        print(f"wp: {exc}", file=sys.stderr)
        return 3
    except ContractViolation as exc:
        print(f"wp: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
