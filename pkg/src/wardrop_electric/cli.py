"""Command-line front end.

Every command reads a network file (see :mod:`wardrop_electric.netfile`)
and writes CSV: a ``#``-prefixed metadata header, then one or more
sections, each introduced by a ``# section=<name>`` line and a column
header. Numbers are printed with 12 significant digits; empty cells mean
"not computed".

Exit codes: 0 ok, 2 unreadable input, 3 solver failure, 4 mode misuse,
5 invariant breach.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys

import numpy as np

from . import __version__
from .errors import NetworkError, ParseError
from .generators import GeneratorSpec
from .localres import resistance_bounds, scan_all_links
from .ndp import (
    Intervention,
    InterventionCostModel,
    LinearCost,
    algorithm1,
    algorithm1_nonlinear,
    delta_cost_exact,
    electrical_sweep,
    exact_sweep,
    ranking,
)
from .netfile import load, serialize
from .resistor import effective_resistances, from_affine
from .walks import gap_rhs, term1, term2
from .wardrop import AffineGame, GeneralGame, solve_affine, solve_convex

EXIT_OK, EXIT_PARSE, EXIT_SOLVER, EXIT_MODE, EXIT_BREACH = 0, 2, 3, 4, 5

log = logging.getLogger(__name__)


class ModeError(Exception):
    pass


class InvariantBreach(Exception):
    pass


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        if np.isnan(x):
            return ""
        value = float(x)
        if value == 0.0:
            value = 0.0  # drop the sign of -0.0
        return f"{value:.12g}"
    return str(x)


class Report:
    """Collects metadata and CSV sections, then renders them in order."""

    def __init__(self, command: str, args: argparse.Namespace):
        self.lines = [f"# wardrop-electric {__version__}", f"# command={command}"]
        flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "output", "command")}
        self.lines.append("# flags=" + " ".join(f"{k}={v}" for k, v in flags.items()))
        self.lines.append(f"# seed={args.seed}")

    def section(self, name: str, header: list[str], rows):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(x) for x in row])
        self.lines.append(f"# section={name}")
        self.lines.append(buf.getvalue().rstrip("\n"))

    def render(self) -> str:
        return "\n".join(self.lines) + "\n"


def _distances(spec: str) -> list[int]:
    try:
        if ".." in spec:
            lo, hi = spec.split("..")
            ds = list(range(int(lo), int(hi) + 1))
        else:
            ds = [int(x) for x in spec.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad distance list {spec!r}") from exc
    if not ds or min(ds) < 1:
        raise argparse.ArgumentTypeError("distances must be at least 1")
    return ds


def _pair(spec: str) -> tuple[int, int]:
    try:
        i, j = (int(x) for x in spec.replace("-", ",").split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad link {spec!r}; expected i,j") from exc
    return (min(i, j), max(i, j))


def _cost(spec: str) -> LinearCost:
    kind, _, value = spec.partition(":")
    if kind != "linear":
        raise argparse.ArgumentTypeError("only linear:<c> intervention costs are supported")
    try:
        return LinearCost(float(value))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _solve(game):
    if isinstance(game, AffineGame):
        return solve_affine(game)
    return solve_convex(game)


def _resistor_view(game):
    if isinstance(game, GeneralGame):
        raise ModeError("resistance commands need an affine network")
    return from_affine(game)


# --------------------------------------------------------------------------
# commands


def cmd_equilibrium(args, report: Report):
    game = load(args.input, args.seed)
    eq = _solve(game)
    tau = game.tau(eq.f)
    net = game.network
    report.section(
        "links",
        ["link", "tail", "head", "flow", "delay", "multiplier"],
        [(e, t, h, eq.f[e], tau[e], eq.lam[e]) for e, (t, h) in enumerate(net.links)],
    )
    report.section("nodes", ["node", "potential"], [(k, g) for k, g in enumerate(eq.gamma)])
    report.section("summary", ["social_cost", "unused_links"],
                   [(eq.social_cost, " ".join(str(e) for e in sorted(eq.support_complement)))])


def cmd_resistance(args, report: Report):
    game = load(args.input, args.seed)
    rn = _resistor_view(game)
    links = rn.resistor_links if args.links == "all" else [_pair(s) for s in args.links.split(";") if s]
    for l in links:
        if rn.weight(*l) <= 0:
            raise ModeError(f"{l} is not a link of the resistor network")
    exact = effective_resistances(rn, links) if args.exact else {}
    distances = args.distance or []
    rows = []
    for d in distances or [None]:
        if d is not None:
            if args.links == "all":
                bounds = scan_all_links(rn, d, jobs=args.jobs)
            else:
                bounds = {l: resistance_bounds(rn, l, d) for l in links}
        for l in links:
            r = exact.get(l)
            lo = hi = None
            if d is not None:
                lo, hi = bounds[l].lower, bounds[l].upper
            rows.append((
                "" if d is None else d, l[0], l[1], lo, hi, r,
                None if d is None else hi - lo,
                None if r is None or d is None else (hi - r) / r,
                None if r is None or d is None else (r - lo) / r,
                None if r is None else r * rn.weight(*l),
            ))
    report.section(
        "resistance",
        ["d", "i", "j", "r_lower", "r_upper", "r_exact", "gap", "rel_upper", "rel_lower", "centrality"],
        rows,
    )


def _model(args) -> InterventionCostModel:
    return InterventionCostModel(alpha=args.alpha, h=args.h or LinearCost(1.0), u_max=args.umax)


def _exact_optimum(game, eq, e, model):
    from scipy.optimize import minimize_scalar

    h = model.cost_for(e)

    def objective(u):
        return delta_cost_exact(game, Intervention(e, u), eq)[0] - model.alpha * h(u)

    if model.alpha == 0:
        candidates = [model.u_max]
    else:
        res = minimize_scalar(lambda u: -objective(u), bounds=(0.0, model.u_max), method="bounded",
                              options={"xatol": 1e-8})
        candidates = [0.0, float(res.x), model.u_max]
    values = [objective(u) for u in candidates]
    k = int(np.argmax(values))
    return candidates[k], values[k]


def cmd_ndp(args, report: Report):
    game = load(args.input, args.seed)
    nonlinear = isinstance(game, GeneralGame)
    if nonlinear and args.mode != "exact" and not args.approx:
        raise ModeError("nonlinear delays need --approx for electrical and algorithm1 modes")
    eq = _solve(game)
    d = None if args.mode == "electrical" else args.distance
    if args.mode == "algorithm1" and d is None:
        raise ModeError("--mode algorithm1 needs --distance")

    if args.u is not None:
        if args.mode == "exact":
            gains = exact_sweep(game, args.u, eq)
        else:
            gains = electrical_sweep(game, args.u, d, eq, jobs=args.jobs)
        order = ranking(gains)
        rank = {e: k + 1 for k, e in enumerate(order)}
        report.section("sweep", ["link", "u", "gain", "rank"],
                       [(e, args.u, gains[e], rank[e]) for e in sorted(gains)])
        report.section("choice", ["link", "u", "gain", "approximate"],
                       [(order[0], args.u, gains[order[0]], nonlinear and args.mode != "exact")])
        return

    model = _model(args)
    if args.mode == "exact":
        rows = []
        best, best_val, best_u = None, -np.inf, 0.0
        for e in range(game.network.link_count):
            u, val = _exact_optimum(game, eq, e, model)
            rows.append((e, u, val))
            if best is None or val > best_val + 1e-12 * max(1.0, abs(best_val)):
                best, best_val, best_u = e, val, u
        report.section("links", ["link", "u", "objective"], rows)
        report.section("choice", ["link", "u", "objective", "approximate"], [(best, best_u, best_val, False)])
        return

    if nonlinear:
        result = algorithm1_nonlinear(game, model, d, jobs=args.jobs, eq=eq)
    else:
        result = algorithm1(game, model, d, jobs=args.jobs, eq=eq)
    report.section(
        "links",
        ["link", "tail", "head", "flow", "current", "slope", "r_lower", "r_upper", "u", "gain",
         "objective", "relative_bound", "gain_floor", "supported"],
        [(r.link, r.tail, r.head, r.flow, r.current, r.slope, r.r_lower, r.r_upper, r.u_opt, r.gain,
          r.objective, r.relative_bound, r.gain_floor, r.supported) for r in result.per_link_table],
    )
    report.section("choice", ["link", "u", "objective", "approximate"],
                   [(result.chosen_link, result.chosen_magnitude, result.objective, result.approximate)])


def cmd_gapscan(args, report: Report):
    game = load(args.input, args.seed)
    rn = _resistor_view(game)
    exact = effective_resistances(rn)
    rows = []
    for d in range(1, args.dmax + 1):
        bounds = scan_all_links(rn, d, jobs=args.jobs)
        rel = np.array([(bounds[l].upper - bounds[l].lower) / exact[l] for l in rn.resistor_links])
        rows.append((d, float(rel.mean()), float(rel.max())))
    report.section("gapscan", ["d", "mean_relative_gap", "max_relative_gap"], rows)


def cmd_walks(args, report: Report):
    game = load(args.input, args.seed)
    rn = _resistor_view(game)
    l = args.link
    if rn.weight(*l) <= 0:
        raise ModeError(f"{l} is not a link of the resistor network")
    rows = []
    breach = []
    for d in args.distance:
        b = resistance_bounds(rn, l, d)
        t1, t2, rhs = term1(rn, l, d), term2(rn, l, d), gap_rhs(rn, l, d)
        rows.append((d, t1, t2, rhs, b.gap))
        if b.gap > rhs + 1e-9 * max(1.0, abs(rhs)):
            breach.append(d)
    report.section("walks", ["d", "term1", "term2", "gap_rhs", "measured_gap"], rows)
    if breach:
        raise InvariantBreach(f"measured gap exceeds the bound at d={breach}")


def _scalar(text: str):
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


def cmd_generate(args, report: Report):
    params = {}
    for item in args.param or []:
        key, _, value = item.partition("=")
        parts = [_scalar(v) for v in value.split(",")]
        params[key] = parts[0] if len(parts) == 1 else parts
    spec = GeneratorSpec(args.kind, params)
    from .netfile import from_document

    game = from_document({"generator": {"kind": spec.kind, "params": spec.params}}, args.seed)
    report.raw = serialize(game, spec)


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wardrop-electric", description=__doc__.split("\n")[0])
    p.add_argument("--seed", type=int, default=0, help="seed for generated networks (default 0)")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes for link scans")
    p.add_argument("--output", "-o", default=None, help="write to this file instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("equilibrium", help="Wardrop equilibrium flows, delays and multipliers")
    s.add_argument("input")
    s.set_defaults(func=cmd_equilibrium)

    s = sub.add_parser("resistance", help="local bounds and exact effective resistances")
    s.add_argument("input")
    s.add_argument("--distance", type=_distances, default=None, help="d, d1,d2 or lo..hi")
    s.add_argument("--exact", action="store_true")
    s.add_argument("--links", default="all", help="'all' or 'i,j;k,l'")
    s.set_defaults(func=cmd_resistance)

    s = sub.add_parser("ndp", help="single-link intervention choice")
    s.add_argument("input")
    s.add_argument("--mode", choices=["exact", "electrical", "algorithm1"], default="algorithm1")
    s.add_argument("--distance", type=int, default=None)
    s.add_argument("--alpha", type=float, default=0.0)
    s.add_argument("--umax", type=float, default=100.0)
    s.add_argument("--h", type=_cost, default=None, help="intervention cost, linear:<c>")
    s.add_argument("--u", type=float, default=None, help="fixed magnitude: rank links instead of optimizing")
    s.add_argument("--approx", action="store_true", help="allow the heuristic for nonlinear delays")
    s.set_defaults(func=cmd_ndp)

    s = sub.add_parser("gapscan", help="mean relative bound gap for d = 1..dmax")
    s.add_argument("input")
    s.add_argument("--dmax", type=int, required=True)
    s.set_defaults(func=cmd_gapscan)

    s = sub.add_parser("walks", help="random-walk decomposition of the bound gap")
    s.add_argument("input")
    s.add_argument("--link", type=_pair, required=True)
    s.add_argument("--distance", type=_distances, required=True)
    s.set_defaults(func=cmd_walks)

    s = sub.add_parser("generate", help="write a generated network file")
    s.add_argument("kind", choices=GeneratorSpec.KINDS)
    s.add_argument("--param", action="append", help="key=value generator parameter")
    s.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    report = Report(args.command, args)
    report.raw = None
    try:
        args.func(args, report)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ModeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODE
    except InvariantBreach as exc:
        out = report.render()
        _emit(out, args.output)
        print(f"invariant breach: {exc}", file=sys.stderr)
        return EXIT_BREACH
    except (NetworkError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    _emit(report.raw if report.raw is not None else report.render(), args.output)
    return EXIT_OK


def _emit(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


if __name__ == "__main__":
    sys.exit(main())
