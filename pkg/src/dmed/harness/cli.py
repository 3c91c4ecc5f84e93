"""Command-line entry point.

Exit status: 0 ok, 1 usage or configuration error, 2 runtime error.
Set ``DMED_LOG_LEVEL`` (e.g. ``INFO`` or ``DEBUG``) for progress logging.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

import numpy as np

from dmed.observation import lemma1_recursion
from dmed.seeding import substream
from dmed.topology import (
    EdgeListFormatError,
    GraphGenerationError,
    build_laplacian,
    generate_for_lambda2,
    lambda2,
    read_edgelist,
    write_edgelist,
)

from .config import ConfigError, load_config
from .experiment import TrialError, emit_csv, run_experiment

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("dmed")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    problems = cfg.problems()
    if problems:
        for p in problems:
            print(f"invalid: {p}", file=sys.stderr)
        return EXIT_USAGE
    series = run_experiment(cfg, workers=args.workers)
    emit_csv(series, args.out)
    print(f"wrote {len(series)} rows to {args.out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    s = cfg.schedule
    print(f"delta={s.delta:g} eps_bar={s.eps_bar:g} delta0={s.delta0:g}")
    print(f"bound: tau3 < min(1 - tau1, 0.5*delta0) = {s.tau3_bound:g} (tau3={s.tau3:g})")
    problems = cfg.problems()
    if problems:
        for p in problems:
            print(f"violated: {p}")
        return EXIT_USAGE
    print("ok")
    return EXIT_OK


def _cmd_graph_gen(args) -> int:
    if args.nodes < 2 or not 0 <= args.target_lambda2 <= args.nodes:
        raise UsageError(f"--target-lambda2 must lie in [0, {args.nodes}] with --nodes >= 2")
    g, radius = generate_for_lambda2(
        args.nodes, args.target_lambda2, substream(args.seed), args.tolerance
    )
    write_edgelist(g, args.out)
    lam = lambda2(build_laplacian(g))
    print(f"n_nodes={g.n_nodes} edges={g.n_edges} lambda2={lam:.6f} radius={radius:.6f}")
    return EXIT_OK


def _cmd_graph_info(args) -> int:
    g = read_edgelist(args.edgelist)
    print(f"n_nodes={g.n_nodes}")
    print(f"edges={g.n_edges}")
    print(f"lambda2={lambda2(build_laplacian(g)):.10g}")
    return EXIT_OK


def _cmd_lemma1(args) -> int:
    delta0 = 1.0 - args.eps_bar if args.delta >= 1 else args.delta
    if not 0 < args.eps0 < delta0:
        raise UsageError(f"--eps0 must lie in (0, delta0={delta0:g})")
    try:
        z = lemma1_recursion(
            args.a1, args.mu, args.a2, args.delta, args.sigma, args.tmax,
            substream(args.seed), n_paths=args.trials, record_every=args.record_every, z0=args.z0,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    t = np.arange(0, args.tmax + 1, args.record_every)
    scaled = (t[:, None] + 1.0) ** (delta0 - args.eps0) * z**2
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "scaled_median", "scaled_mean", "z_abs_median", "n_trials"])
        for i, ti in enumerate(t):
            w.writerow([int(ti), format(np.median(scaled[i]), ".16e"),
                        format(scaled[i].mean(), ".16e"),
                        format(np.median(np.abs(z[i])), ".16e"), args.trials])
    print(f"exponent delta0 - eps0 = {delta0 - args.eps0:g}; wrote {len(t)} rows to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dmed", description="Distributed median estimation simulator")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run a Monte-Carlo experiment and write CSV")
    sim.add_argument("config")
    sim.add_argument("--out", required=True)
    sim.add_argument("--workers", type=int, default=1)
    sim.set_defaults(func=_cmd_simulate)

    val = sub.add_parser("validate", help="check schedule admissibility of a config")
    val.add_argument("config")
    val.set_defaults(func=_cmd_validate)

    graph = sub.add_parser("graph", help="graph utilities")
    gsub = graph.add_subparsers(dest="graph_command", required=True, parser_class=_Parser)
    gen = gsub.add_parser("gen", help="random geometric graph with a target lambda2")
    gen.add_argument("--nodes", type=int, required=True)
    gen.add_argument("--target-lambda2", type=float, required=True)
    gen.add_argument("--tolerance", type=float, default=0.5)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_graph_gen)
    info = gsub.add_parser("info", help="print node count, edge count and lambda2")
    info.add_argument("edgelist")
    info.set_defaults(func=_cmd_graph_info)

    lem = sub.add_parser("lemma1", help="simulate the scalar averaging-error recursion")
    lem.add_argument("--a1", type=float, required=True)
    lem.add_argument("--mu", type=float, required=True)
    lem.add_argument("--a2", type=float, required=True)
    lem.add_argument("--delta", type=float, required=True)
    lem.add_argument("--sigma", type=float, required=True)
    lem.add_argument("--tmax", type=int, required=True)
    lem.add_argument("--trials", type=int, default=100)
    lem.add_argument("--eps-bar", type=float, default=0.1)
    lem.add_argument("--eps0", type=float, default=0.1)
    lem.add_argument("--z0", type=float, default=1.0)
    lem.add_argument("--seed", type=int, default=0)
    lem.add_argument("--record-every", type=int, default=10)
    lem.add_argument("--out", required=True)
    lem.set_defaults(func=_cmd_lemma1)
    return p


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("DMED_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, EdgeListFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphGenerationError, TrialError, OSError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
