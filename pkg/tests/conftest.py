"""Shared fixtures: parallel simulation batches and the certificate run.

The expensive artifacts (30-seed simulation sweeps at n = 2^16, the box
elimination certificate, the 400-instance lemma battery) are built once per
session and shared between the module tests and the acceptance suite.
"""

import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import pytest


def _jobs() -> int:
    return min(8, os.cpu_count() or 1)


@dataclass(frozen=True)
class SimSummary:
    variant: str
    n: int
    delta: float | None
    seed: int
    clique_size: int
    success: bool
    round_queries: tuple[int, ...]
    sizes: dict
    positive_complete: bool
    budgets_ok: bool


def run_one(task) -> SimSummary:
    # Top-level so ProcessPoolExecutor can pickle it; audits run inside the
    # worker because transcripts are too large to ship back.
    from cliquequery.cliquealg import audit_result, greedy_clique, run_algorithm, variant_plan
    from cliquequery.oracle import audit_transcript, create_oracle

    variant, n, delta, seed = task
    oracle = create_oracle(n, seed)
    if variant == "greedy":
        result = greedy_clique(oracle, n)
        budgets_ok = audit_transcript(result.transcript).ok
    else:
        result = run_algorithm(variant, oracle, n, delta)
        deltas = variant_plan(variant, n, delta)["deltas"]
        budgets_ok = audit_transcript(result.transcript, deltas=deltas).ok
    return SimSummary(
        variant=variant, n=n, delta=result.delta, seed=seed,
        clique_size=result.clique_size, success=result.success,
        round_queries=tuple(result.round_queries), sizes=dict(result.sizes),
        positive_complete=audit_result(result), budgets_ok=budgets_ok,
    )


def run_batch(variant: str, n: int, delta: float, seeds) -> list[SimSummary]:
    tasks = [(variant, n, delta, s) for s in seeds]
    if _jobs() == 1:
        return [run_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=_jobs()) as pool:
        return list(pool.map(run_one, tasks))


def median_size(batch) -> float:
    return statistics.median(s.clique_size for s in batch)


@pytest.fixture(scope="session")
def sim16():
    """greedy / one_round / three_round at n = 2^16, delta = 1, seeds 0..29."""
    n = 2**16
    return {
        "greedy": run_batch("greedy", n, 1.0, range(30)),
        "one_round": run_batch("one_round", n, 1.0, range(30)),
        "three_round": run_batch("three_round", n, 1.0, range(30)),
    }


@pytest.fixture(scope="session")
def certificate01():
    from cliquequery.certopt import verify_path_certificate

    return verify_path_certificate(slack=0.1, audit_points=100000, seed=0)


@pytest.fixture(scope="session")
def battery_rows():
    from cliquequery.matchdecomp import verification_battery

    return list(verification_battery(graph_instances=200, clique_instances=200))
