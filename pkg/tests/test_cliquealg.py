"""Query algorithms: greedy baseline and the bounded-round variants.

Simulation medians are pinned to values measured over fixed seed ranges;
the oracle is a deterministic PRF, so these are exact reproducibility
checks, not statistical assertions.
"""

import math
import statistics
from fractions import Fraction

import numpy as np
import pytest

from cliquequery.cliquealg import (
    MissingQueryError,
    audit_result,
    budget_fit,
    common_neighbors,
    greedy_clique,
    run_algorithm,
    variant_plan,
)
from cliquequery.oracle import Schedule, Transcript, create_oracle, submit_round

from conftest import median_size, run_batch


def test_budget_fit():
    assert budget_fit(0) == 1
    assert budget_fit(1) == 2
    assert budget_fit(44) == 9
    assert budget_fit(45) == 10
    assert budget_fit(10**12) == 1414214
    with pytest.raises(ValueError):
        budget_fit(-1)


def test_common_neighbors_small():
    n = 10
    oracle = create_oracle(n, 5)
    tr = Transcript.for_oracle(oracle, Schedule(n=n, deltas=(1.9,)))
    S = [0, 1]
    T = [2, 3, 4, 5, 6]
    submit_round(tr, oracle, [(s, t) for s in S for t in T])
    got = common_neighbors(tr, S, T)
    want = [t for t in T if all(oracle.answer(s, t) for s in S)]
    assert got == want


def test_common_neighbors_requires_queries_and_disjointness():
    n = 10
    oracle = create_oracle(n, 5)
    tr = Transcript.for_oracle(oracle, Schedule(n=n, deltas=(1.0,)))
    submit_round(tr, oracle, [(0, 2), (0, 3)])
    with pytest.raises(MissingQueryError):
        common_neighbors(tr, [0], [2, 3, 4])  # (0, 4) never asked
    with pytest.raises(ValueError):
        common_neighbors(tr, [0, 1], [1, 2])


def test_common_neighbors_large_matches_direct_scan():
    n = 2000
    oracle = create_oracle(n, 8)
    tr = Transcript.for_oracle(oracle, Schedule(n=n, deltas=(1.2,)))
    S = [0, 1, 2]
    T = list(range(3, 1003))
    us = np.repeat(np.array(S, dtype=np.int64), len(T))
    vs = np.tile(np.array(T, dtype=np.int64), len(S))
    tr.submit_arrays(oracle, us, vs)
    got = common_neighbors(tr, S, T)
    want = [
        t for t in T
        if oracle.answer(0, t) and oracle.answer(1, t) and oracle.answer(2, t)
    ]
    assert got == want
    assert len(got) > 0  # ~1000/8 expected; degenerate run would hide bugs


def test_greedy_minimal_instance():
    oracle = create_oracle(2, 0)
    r = greedy_clique(oracle, 2)
    assert r.variant == "greedy"
    assert r.clique_size in (1, 2)
    assert audit_result(r)
    assert r.success == (r.clique_size >= 1)  # target is log2(2) = 1


def test_greedy_structure():
    n = 4096
    r = greedy_clique(create_oracle(n, 7), n)
    assert audit_result(r)
    # candidate pool can only shrink
    th = r.t_history
    assert all(b <= a for a, b in zip(th, th[1:]))
    assert th[-1] == 0
    assert r.sizes["K"] == r.clique_size
    assert sum(r.round_queries) == r.transcript.total_queries


def test_greedy_medians_n16(sim16):
    batch = sim16["greedy"]
    sizes = [s.clique_size for s in batch]
    assert statistics.median(sizes) == 16
    assert min(sizes) >= 15 and max(sizes) <= 17
    assert all(s.positive_complete for s in batch)
    assert all(s.budgets_ok for s in batch)


def test_greedy_shrink_ratio_and_query_envelope():
    # 100 seeds at n = 2^16: candidate sets halve per adopted vertex
    # (grand mean ratio 0.489 measured) and total queries stay under
    # 2n + 20 sqrt(n).
    n = 2**16
    ratios = []
    totals = []
    sizes = []
    for seed in range(100):
        r = greedy_clique(create_oracle(n, seed), n)
        th = r.t_history
        steps = [b / a for a, b in zip(th, th[1:]) if a > 4]
        ratios.append(statistics.mean(steps))
        totals.append(sum(r.round_queries))
        sizes.append(r.clique_size)
    assert 0.47 <= statistics.mean(ratios) <= 0.53
    assert max(totals) <= 2 * n + 20 * math.isqrt(n)
    assert statistics.median(sizes) == 16


def test_greedy_median_n20():
    n = 2**20
    sizes = [greedy_clique(create_oracle(n, s), n).clique_size for s in range(30)]
    med = statistics.median(sizes)
    assert med == 20
    assert 17 <= med <= 23  # ~log2(n) +- loglog band


def test_one_round_medians_n16(sim16):
    batch = sim16["one_round"]
    sizes = [s.clique_size for s in batch]
    assert statistics.median(sizes) == 12
    assert min(sizes) >= 11 and max(sizes) <= 13
    for s in batch:
        assert s.positive_complete and s.budgets_ok
        assert len(s.round_queries) == 1
        assert s.round_queries[0] <= 2**16
        assert s.sizes["S"] == 256  # floor(n^(delta/2)) at delta = 1
        assert s.sizes["S_prime"] == s.clique_size


def test_three_round_medians_n16(sim16):
    batch = sim16["three_round"]
    sizes = [s.clique_size for s in batch]
    assert statistics.median(sizes) == 17
    assert min(sizes) >= 16 and max(sizes) <= 18
    assert statistics.median([s.sizes["S_prime"] for s in batch]) == 5
    assert statistics.median([s.sizes["T_prime"] for s in batch]) == 362
    for s in batch:
        assert s.positive_complete and s.budgets_ok
        assert len(s.round_queries) == 3
        assert s.sizes["S_prime"] + s.sizes["T_second"] == s.clique_size


def test_two_small_medians_n14():
    batch = run_batch("two_small", 2**14, 1.2, range(30))
    sizes = [s.clique_size for s in batch]
    assert statistics.median(sizes) == 15
    assert min(sizes) >= 14 and max(sizes) <= 16
    assert all(s.positive_complete and s.budgets_ok for s in batch)


def test_two_large_medians_n10():
    batch = run_batch("two_large", 2**10, 1.5, range(30))
    sizes = [s.clique_size for s in batch]
    assert statistics.median(sizes) == 13
    assert min(sizes) >= 12 and max(sizes) <= 15
    assert all(s.positive_complete and s.budgets_ok for s in batch)


def test_two_small_n20_set_sizes():
    # The n = 2^20, delta = 1.2 sizing: |S| = 16 pins, |T| hits the n - |S|
    # cap.  |S'| lands in the measured [4, 6] band (median 5 over 30 seeds);
    # the asymptotic (delta/3) log2 n = 8 is not reached at this n because
    # the max-clique-in-G(m, 1/2) step loses the usual loglog terms.
    n = 2**20
    plan = variant_plan("two_small", n, 1.2)
    assert plan["S"] == 16
    assert plan["T"] == n - 16
    assert plan["T_prime_cap"] == 4096
    assert plan["deltas"] == (1.2, 1.2)
    r = run_algorithm("two_small", create_oracle(n, 0), n, 1.2)
    assert r.sizes["S"] == 16
    assert r.sizes["T"] == n - 16
    assert 4 <= r.sizes["S_prime"] <= 6
    assert audit_result(r)


def test_plans_coincide_at_six_fifths():
    # At delta = 6/5 the small- and large-delta two-round schedules use the
    # same exponents: delta/6 = (1 - delta/2)/2 = 1/5 and 5 delta/6 = 1.
    d = Fraction(6, 5)
    assert d / 6 == (1 - d / 2) / 2 == Fraction(1, 5)
    assert 5 * d / 6 == 1
    for n in (2**10, 2**14, 2**17):
        a = variant_plan("two_small", n, 1.2)
        b = variant_plan("two_large", n, 1.2)
        assert a["S"] == b["S"]
        assert a["T"] == b["T"]
        assert a["deltas"] == b["deltas"]
        # candidate caps come from different estimates and legitimately differ


def test_variant_domain_errors():
    oracle = create_oracle(64, 0)
    for variant, delta in [
        ("two_small", 1.3),
        ("two_small", 0.9),
        ("two_large", 1.1),
        ("two_large", 2.0),
        ("one_round", 2.0),
        ("one_round", 0.99),
        ("three_round", 0.5),
    ]:
        with pytest.raises(ValueError):
            run_algorithm(variant, oracle, 64, delta)
    with pytest.raises(ValueError):
        run_algorithm("unknown", oracle, 64, 1.0)
    with pytest.raises(ValueError):
        run_algorithm("one_round", oracle, 128, 1.0)  # n mismatch


def test_graceful_failure_small_n():
    # Tiny instances miss their targets but must still return valid cliques.
    r1 = run_algorithm("two_small", create_oracle(64, 0), 64, 1.0)
    assert not r1.success
    assert r1.clique_size == 5
    assert r1.truncated
    assert audit_result(r1)

    r2 = run_algorithm("three_round", create_oracle(64, 0), 64, 1.0)
    assert r2.clique_size == 5
    assert r2.truncated
    assert audit_result(r2)

    r3 = run_algorithm("two_large", create_oracle(64, 0), 64, 1.5)
    assert r3.clique_size == 7
    assert not r3.truncated
    assert audit_result(r3)


def test_target_sizes():
    n = 2**10
    assert run_algorithm("one_round", create_oracle(n, 1), n, 1.4).target_size == pytest.approx(1.4 * 10)
    assert run_algorithm("two_small", create_oracle(n, 1), n, 1.2).target_size == pytest.approx(1.6 * 10)
    assert run_algorithm("two_large", create_oracle(n, 1), n, 1.5).target_size == pytest.approx(1.75 * 10)
    assert run_algorithm("three_round", create_oracle(n, 1), n, 1.0).target_size == pytest.approx(1.5 * 10)
