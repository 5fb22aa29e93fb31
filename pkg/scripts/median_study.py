"""Median clique-size study across algorithm variants.

Runs each requested variant against `--seeds` independent oracles at a common
n and prints median / range of the clique size, success counts, and realized
query totals. This is the experiment behind the simulation medians quoted in
the README.
"""

from __future__ import annotations

import argparse
import statistics
import sys

from cliquequery.cliquealg import VARIANTS, greedy_clique, run_algorithm, variant_plan
from cliquequery.oracle import audit_transcript, create_oracle


def run_seed(variant: str, n: int, delta: float, seed: int):
    oracle = create_oracle(n, seed)
    if variant == "greedy":
        return greedy_clique(oracle, n)
    return run_algorithm(variant, oracle, n, delta)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2**16)
    ap.add_argument("--delta", type=float, default=1.0)
    ap.add_argument("--seeds", type=int, default=30)
    ap.add_argument("--variants", default="greedy,one_round,three_round",
                    help="comma-separated subset of: " + ",".join(VARIANTS))
    ap.add_argument("--audit", action="store_true",
                    help="re-derive every oracle answer from the seed (slow)")
    args = ap.parse_args(argv)

    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    unknown = sorted(set(variants) - set(VARIANTS))
    if unknown:
        ap.error("unknown variants: " + ", ".join(unknown))

    for variant in variants:
        sizes = []
        totals = []
        successes = 0
        for seed in range(args.seeds):
            res = run_seed(variant, args.n, args.delta, seed)
            sizes.append(res.clique_size)
            totals.append(sum(res.round_queries))
            successes += bool(res.success)
            if args.audit:
                deltas = None
                if variant != "greedy":
                    deltas = variant_plan(variant, args.n, args.delta)["deltas"]
                rep = audit_transcript(res.transcript, deltas=deltas)
                if not rep.ok:
                    print(f"audit failure: {variant} seed {seed}", file=sys.stderr)
                    return 1
        med = statistics.median(sizes)
        print(f"{variant:12s} n={args.n} delta={args.delta:g} "
              f"median={med:g} range=[{min(sizes)},{max(sizes)}] "
              f"success={successes}/{args.seeds} "
              f"median_queries={int(statistics.median(totals))}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
