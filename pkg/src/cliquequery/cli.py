"""Command-line front end: simulation batches, bound curves, lemma
verification batteries, the box-elimination certificate, and the fixed-delta
bound table, all emitting reproducible CSV/JSON/SVG artifacts.

Exit status: 0 on success, 1 on runtime failure or a failed check
(verify with a failing lemma, optimize without a certificate, transcript
audit finding issues), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor

from .bounds import KINDS, bound_grid
from .certopt import solve_table1, verify_path_certificate
from .cliquealg import VARIANTS, audit_result, greedy_clique, run_algorithm
from .errors import DomainError, PreconditionError
from .matchdecomp import verification_battery
from .oracle import audit_transcript, create_oracle, dump_text, parse_text
from .reports import RunConfig, write_csv, write_json, write_svg

ENV_OUT = "CLIQUEQUERY_OUT"


class UsageError(Exception):
    pass


def _out_path(args, filename: str) -> str:
    if os.path.isabs(filename):
        return filename
    base = args.out_dir or os.environ.get(ENV_OUT) or "."
    return os.path.join(base, filename)


def _grid(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:step, got {text!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric grid {text!r}") from None
    return lo, hi, step


def _delta_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad delta list {text!r}") from None


def _config(args, command: str, keys: tuple[str, ...]) -> RunConfig:
    params = {}
    for key in keys:
        value = getattr(args, key)
        if isinstance(value, tuple):
            value = list(value)
        params[key] = value
    return RunConfig(command=command, params=params)


# -- simulate ---------------------------------------------------------------

def _simulate_one(task: tuple[str, int, float, int]):
    variant, n, delta, seed = task
    oracle = create_oracle(n, seed)
    if variant == "greedy":
        result = greedy_clique(oracle, n)
    else:
        result = run_algorithm(variant, oracle, n, delta)
    if not audit_result(result):
        raise RuntimeError(f"positive-completeness audit failed for seed {seed}")
    if variant == "greedy":
        # Greedy runs one adaptive pass of ~log n probe waves; its total is
        # the only budget-relevant figure, reported in the first column.
        q = (sum(result.round_queries), 0, 0)
    else:
        q = tuple(result.round_queries) + (0,) * (3 - len(result.round_queries))
    return (variant, n, result.delta, seed, result.clique_size,
            result.target_size, result.success, q[0], q[1], q[2])


def cmd_simulate(args) -> int:
    if args.variant != "greedy" and not 1.0 <= args.delta <= 2.0:
        raise UsageError(f"delta must lie in [1, 2], got {args.delta}")
    seeds = range(args.base_seed, args.base_seed + args.seeds)
    tasks = [(args.variant, args.n, args.delta, s) for s in seeds]
    jobs = args.jobs or os.cpu_count() or 1
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_simulate_one, tasks))
    else:
        rows = [_simulate_one(t) for t in tasks]
    sizes = [r[4] for r in rows]
    successes = sum(1 for r in rows if r[6])
    config = _config(args, "simulate",
                     ("variant", "n", "delta", "seeds", "base_seed", "jobs", "out"))
    write_csv(
        _out_path(args, args.out),
        ("variant", "n", "delta", "seed", "clique_size", "target_size",
         "success", "queries_r1", "queries_r2", "queries_r3"),
        rows, config,
        summary=(f"instances={len(rows)} successes={successes} "
                 f"median_clique_size={_fmt_median(sizes)}",),
    )
    print(f"simulate: {len(rows)} runs, median clique size {_fmt_median(sizes)}, "
          f"{successes}/{len(rows)} met target")
    return 0


def _fmt_median(values) -> str:
    med = statistics.median(values)
    return str(int(med)) if float(med).is_integer() else repr(float(med))


# -- bounds -----------------------------------------------------------------

def cmd_bounds(args) -> int:
    kinds = tuple(k.strip() for k in args.kinds.split(",")) if args.kinds else KINDS
    for kind in kinds:
        if kind not in KINDS:
            raise UsageError(f"unknown bound kind {kind!r}; choose from {', '.join(KINDS)}")
    lo, hi, step = args.grid
    rows = bound_grid(kinds, lo, hi, step, l=args.l)
    config = _config(args, "bounds", ("kinds", "grid", "l", "plot", "out"))
    write_csv(_out_path(args, args.out), ("delta", "kind", "alpha"), rows, config)
    if args.plot:
        series: dict[str, list[tuple[float, float]]] = {}
        for delta, kind, alpha in rows:
            series.setdefault(kind, []).append((delta, alpha))
        write_svg(_out_path(args, args.plot), series, config,
                  title="Upper bounds on the clique-size exponent")
    print(f"bounds: {len(rows)} rows over delta in [{lo}, {hi}]")
    return 0


# -- verify -----------------------------------------------------------------

def cmd_verify(args) -> int:
    rows = []
    failures = 0
    for instance_id, k, l, check in verification_battery(
            graph_instances=args.instances, clique_instances=args.instances,
            graph_n=args.graph_n, k=args.k, l=args.l,
            slack_c=args.slack_c, base_seed=args.base_seed):
        rows.append((instance_id, k, l, check.lemma, check.holds,
                     check.measured, check.bound, check.slack_used))
        if not check.holds:
            failures += 1
    config = _config(args, "verify",
                     ("instances", "graph_n", "k", "l", "slack_c",
                      "base_seed", "out"))
    write_csv(
        _out_path(args, args.out),
        ("instance_id", "k", "l", "lemma", "holds", "measured_value",
         "bound_value", "slack_used"),
        rows, config,
        summary=(f"checks={len(rows)} failures={failures}",),
    )
    print(f"verify: {len(rows)} checks, {failures} failures")
    return 1 if failures else 0


# -- optimize ---------------------------------------------------------------

def cmd_optimize(args) -> int:
    report = verify_path_certificate(
        slack=args.slack, eps_target=args.eps_target, eps0=args.eps0,
        audit_points=args.audit_points, gamma_samples=args.gamma_samples,
        seed=args.seed)
    config = _config(args, "optimize",
                     ("slack", "eps_target", "eps0", "audit_points",
                      "gamma_samples", "seed", "out", "boxes_out"))
    payload = {
        "statement": report.statement,
        "certified": report.certified,
        "problem": report.problem,
        "slack": report.slack,
        "eps0": report.eps0,
        "eps_target": report.eps_target,
        "levels": [
            {"level": s.level, "eps": s.eps, "boxes": s.boxes,
             "pruned_infeasible": s.pruned_infeasible,
             "eliminated": s.eliminated, "surviving": s.surviving}
            for s in report.phase1.levels
        ],
        "survivors": report.phase1.n_survivors,
        "screened": report.screened,
        "audit": {
            "eliminated_points": report.audit.eliminated_points,
            "eliminated_feasible": report.audit.eliminated_feasible,
            "threshold_violations": report.audit.threshold_violations,
            "max_threshold_excess": report.audit.max_threshold_excess,
            "pruned_points": report.audit.pruned_points,
            "pruned_feasible_found": report.audit.pruned_feasible_found,
        },
        "phase2": [
            {"objective": p.objective, "classification": p.classification,
             "value": p.value, "x": list(p.x), "dist_gamma": p.dist_gamma,
             "dist_v": p.dist_v, "kkt_residual": p.kkt_residual,
             "converged": p.converged}
            for p in report.phase2
        ],
        "gamma_samples": report.gamma_samples,
        "gamma_residual": report.gamma_residual,
        "v_residual": report.v_residual,
    }
    write_json(_out_path(args, args.out), payload, config)
    centers = (report.phase1.survivors_lo + report.phase1.survivors_hi) / 2.0
    write_csv(_out_path(args, args.boxes_out),
              ("s1", "s2t", "d2t", "delta"),
              (tuple(float(v) for v in row) for row in centers),
              config,
              summary=(f"surviving_boxes={report.phase1.n_survivors}",))
    print(f"optimize: certified={report.certified}, "
          f"{report.phase1.n_survivors} surviving boxes "
          f"({report.screened} certified by interval screening)")
    return 0 if report.certified else 1


# -- table1 -----------------------------------------------------------------

def cmd_table1(args) -> int:
    rows = []
    notes = []
    caveat = None
    for delta in args.deltas:
        res = solve_table1(delta, net_eps=args.net_eps, seed=args.seed,
                           cap_m1p=not args.drop_m1p_cap)
        rows.append((res.delta, res.alpha_bound, res.n_starts, res.best_point))
        notes.append(f"delta={res.delta} active={';'.join(res.active_constraints)}")
        caveat = res.caveat
    config = _config(args, "table1",
                     ("deltas", "net_eps", "seed", "drop_m1p_cap", "out"))
    write_csv(_out_path(args, args.out),
              ("delta", "alpha_bound", "starts", "best_point"),
              rows, config,
              summary=[f"caveat: {caveat}"] + notes)
    width = max(len(repr(r[0])) for r in rows)
    for r in rows:
        print(f"table1: delta={r[0]!r:<{width}} alpha_bound={r[1]:.6f}")
    return 0


# -- transcript -------------------------------------------------------------

def cmd_transcript(args) -> int:
    if args.action == "dump":
        if args.variant != "greedy" and not 1.0 <= args.delta <= 2.0:
            raise UsageError(f"delta must lie in [1, 2], got {args.delta}")
        oracle = create_oracle(args.n, args.seed)
        if args.variant == "greedy":
            result = greedy_clique(oracle, args.n)
        else:
            result = run_algorithm(args.variant, oracle, args.n, args.delta)
        # The transcript grammar is fixed (header, round lines, sorted
        # triples) and round-trips bit-exactly, so no config comments here.
        from .reports import atomic_write
        atomic_write(_out_path(args, args.out), dump_text(result.transcript))
        print(f"transcript: {result.transcript.rounds_used} rounds written")
        return 0
    text = open(args.file, encoding="utf-8").read()
    transcript = parse_text(text)
    deltas = args.deltas if args.deltas else None
    report = audit_transcript(transcript, deltas=deltas)
    print(f"transcript audit: rounds={report.rounds} "
          f"queries={report.total_queries} ok={report.ok}")
    for issue in report.issues:
        print(f"  issue: {issue}")
    return 0 if report.ok else 1


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cliquequery",
        description="Clique-query simulation and certified-bound workbench")
    parser.add_argument("--out-dir", default=None,
                        help=f"output directory (default ${ENV_OUT} or cwd)")
    parser.add_argument("--config", default=None,
                        help="JSON file whose entries override flag values")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a clique algorithm over seeds")
    p.add_argument("--variant", choices=VARIANTS, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--seeds", type=int, default=30)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=0,
                   help="worker processes (0 = all cores)")
    p.add_argument("--out", default="simulate.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bounds", help="closed-form bound curves")
    p.add_argument("--grid", type=_grid, default=(1.0, 1.95, 0.005),
                   metavar="LO:HI:STEP")
    p.add_argument("--kinds", default=None,
                   help=f"comma list from: {', '.join(KINDS)}")
    p.add_argument("--l", type=int, default=3, help="rounds for prior_l_rounds")
    p.add_argument("--plot", default=None, metavar="FILE.svg")
    p.add_argument("--out", default="bounds.csv")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", help="structural-lemma battery")
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--graph-n", type=int, default=12)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--l", type=int, default=3)
    p.add_argument("--slack-c", type=float, default=4.0)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--out", default="verify.csv")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("optimize", help="box-elimination path certificate")
    p.add_argument("--slack", type=float, default=0.1)
    p.add_argument("--eps-target", type=float, default=None,
                   help="finest box edge (default slack-matched 0.1/L3)")
    p.add_argument("--eps0", type=float, default=0.25)
    p.add_argument("--audit-points", type=int, default=100000)
    p.add_argument("--gamma-samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="optimize.json")
    p.add_argument("--boxes-out", default="optimize_boxes.csv")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("table1", help="fixed-delta three-round bound table")
    p.add_argument("--deltas", type=_delta_list,
                   default=tuple(round(1.0 + 0.1 * z, 1) for z in range(10)))
    p.add_argument("--net-eps", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--drop-m1p-cap", action="store_true",
                   help="solve the relaxation without the matched-mass cap "
                        "(diagnostic)")
    p.add_argument("--out", default="table1.csv")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("transcript", help="dump or audit a query transcript")
    psub = p.add_subparsers(dest="action", required=True)
    pd = psub.add_parser("dump", help="run a variant and save its transcript")
    pd.add_argument("--variant", choices=VARIANTS, default="three_round")
    pd.add_argument("--n", type=int, required=True)
    pd.add_argument("--delta", type=float, default=1.0)
    pd.add_argument("--seed", type=int, default=0)
    pd.add_argument("--out", default="transcript.txt")
    pd.set_defaults(func=cmd_transcript)
    pa = psub.add_parser("audit", help="validate a saved transcript")
    pa.add_argument("--file", required=True)
    pa.add_argument("--deltas", type=_delta_list, default=None,
                    help="per-round budget exponents to enforce")
    pa.set_defaults(func=cmd_transcript)

    return parser


def _apply_config_file(parser: argparse.ArgumentParser, args) -> None:
    if not args.config:
        return
    try:
        with open(args.config, encoding="utf-8") as fh:
            overrides = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config file: {exc}")
    if not isinstance(overrides, dict):
        parser.error("config file must hold a JSON object")
    for key, value in overrides.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            parser.error(f"config key {key!r} does not match any flag")
        current = getattr(args, dest)
        if isinstance(current, tuple) and isinstance(value, list):
            value = tuple(value)
        setattr(args, dest, value)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_config_file(parser, args)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, PreconditionError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
