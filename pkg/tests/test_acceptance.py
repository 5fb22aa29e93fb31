"""End-to-end acceptance battery.

Each test covers one release criterion and prints a single
"criterion N PASS/FAIL: ..." line with the measured numbers, then asserts.
The heavy artifacts (simulation sweeps, the certificate, the lemma battery)
come from the session fixtures in conftest.
"""

import time

import numpy as np

from cliquequery.bounds import (
    closed_form_bound,
    crossing_cubic,
    crossing_root,
    restricted_peak_check,
)
from cliquequery.certopt import (
    alpha_restricted,
    gamma_point,
    lipschitz_constants,
    solve_table1,
)
from cliquequery.cli import main
from cliquequery.matchdecomp import (
    canonical_matching,
    gallai_edmonds,
    maximum_matching,
    random_labeled_clique,
)
from cliquequery.oracle import random_graph
from test_matchdecomp import all_perfect_matchings, dp_matching_number

from conftest import median_size


def _criterion(num: int, ok: bool, detail: str) -> None:
    line = f"criterion {num} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    assert ok, line


TABLE_TARGETS = (
    (1.0, 1.62), (1.1, 1.69), (1.2, 1.77), (1.3, 1.83), (1.4, 1.88),
    (1.5, 1.92), (1.6, 1.95), (1.7, 1.97), (1.8, 1.99), (1.9, 1.997),
)


def test_criterion_1_bound_table_regression():
    t0 = time.perf_counter()
    misses = []
    for delta, target in TABLE_TARGETS:
        res = solve_table1(delta, net_eps=0.05)
        tol = 0.003 if delta == 1.9 else 0.01
        dev = abs(res.alpha_bound - target)
        if dev > tol:
            misses.append(f"delta={delta}: solved {res.alpha_bound:.6f} vs "
                          f"reference {target} (|diff| {dev:.4f} > {tol})")
    elapsed = time.perf_counter() - t0
    ok = not misses and elapsed <= 1800.0
    detail = f"10 deltas at net_eps=0.05 in {elapsed:.0f}s"
    if misses:
        detail += "; " + "; ".join(misses)
    if elapsed > 1800.0:
        detail += "; over the 30 min budget"
    _criterion(1, ok, detail)


def test_criterion_2_lipschitz_certificate():
    rep = lipschitz_constants()
    caps = list(zip(rep.partials_alpha2, (16.0, 8.0, 8.0, 1.0))) + \
        list(zip(rep.partials_alpha3, (32.0, 24.0, 24.0, 2.0)))
    partials_ok = all(p.lo == 0.0 and cap <= p.hi <= cap * (1 + 1e-12)
                      for p, cap in caps)
    ok = (partials_ok and rep.l2 <= 19.7 and rep.l3 <= 46.7
          and rep.within_caps and rep.elapsed < 1.0)
    _criterion(2, ok,
               f"per-partial bounds match ({partials_ok}), "
               f"L2={rep.l2:.4f}<=19.7, L3={rep.l3:.4f}<=46.7, "
               f"elapsed {rep.elapsed * 1000:.1f}ms")


def test_criterion_3_certified_elimination(certificate01):
    c = certificate01
    refinement_ok = all(
        r.classification == "below_threshold"
        or min(r.dist_gamma, r.dist_v) <= 1e-6
        for r in c.phase2
    )
    audit_ok = (c.audit.eliminated_points == 100000
                and c.audit.threshold_violations == 0
                and c.audit.pruned_feasible_found == 0)
    ok = (c.certified and c.elapsed <= 900.0 and refinement_ok and audit_ok
          and c.gamma_residual <= 1e-12)
    _criterion(3, ok,
               f"slack=0.1 certificate in {c.elapsed:.0f}s, "
               f"{c.phase1.n_survivors} survivors ({c.screened} interval-"
               f"screened, {len(c.phase2)} refinements), audit "
               f"{c.audit.eliminated_points} pts "
               f"{c.audit.threshold_violations} violations")


def test_criterion_4_closed_form_identities():
    six_fifths = 1.2
    eq_ok = (closed_form_bound("two_small", six_fifths) == 1.6
             and closed_form_bound("two_large", six_fifths) == 1.6)
    grid = np.linspace(1.205, 1.995, 100)
    peak_resid = max(restricted_peak_check(float(d), grid_points=200).identity_residual
                     for d in grid)
    cubic_resid = max(abs(crossing_cubic(float(d), crossing_root(float(d))))
                      for d in grid)
    path_resid = 0.0
    for d in np.linspace(1.0, 2.0, 100):
        a2, a3 = alpha_restricted(*gamma_point(float(d)))
        target = 1.0 + 0.5 * float(d)
        path_resid = max(path_resid, abs(a2 - target), abs(a3 - target))
    ok = (eq_ok and peak_resid < 1e-12 and cubic_resid < 1e-9
          and path_resid < 1e-12)
    _criterion(4, ok,
               f"two_small(6/5)==two_large(6/5)==1.6 ({eq_ok}), "
               f"peak identity residual {peak_resid:.2e}, "
               f"crossing cubic residual {cubic_resid:.2e}, "
               f"path point residual {path_resid:.2e}")


def test_criterion_5_lemma_battery(battery_rows):
    graph_rows = [r for r in battery_rows if r[0].startswith("graph-")]
    clique_rows = [r for r in battery_rows if r[0].startswith("clique-")]
    graph_ids = {r[0] for r in graph_rows}
    clique_ids = {r[0] for r in clique_rows}
    failures = [r for r in battery_rows if not r[3].holds]
    lemmas = {r[3].lemma for r in battery_rows}
    expected = {"uncovered_edges", "efree3_half", "deg1_avoidable",
                "efree2_bound", "efree3_bound"}
    shape_ok = (len(graph_ids) >= 200 and len(clique_ids) >= 200
                and lemmas == expected
                and all(r[1] == 10 and r[2] == 3 for r in clique_rows))
    ok = shape_ok and not failures
    _criterion(5, ok,
               f"{len(graph_ids)} graph + {len(clique_ids)} clique instances, "
               f"{len(battery_rows)} checks over {len(lemmas)} lemmas, "
               f"{len(failures)} failures")


def test_criterion_6_matching_oracle_equivalence():
    mismatches = 0
    ged_bad = 0
    for i in range(500):
        n = 6 + (i % 13)  # sizes 6..18
        g = random_graph(n, seed=10_000 + i)
        nu_ref = dp_matching_number(g)
        if maximum_matching(g).size != nu_ref:
            mismatches += 1
        ged = gallai_edmonds(g)
        if ged.nu != nu_ref or ged.odd_component_count - len(ged.S) != g.n - 2 * ged.nu:
            ged_bad += 1
    canon_bad = 0
    for seed in range(100):
        labeled = random_labeled_clique(8, 3, seed=seed)
        matching, _ = canonical_matching(labeled)

        def key(pairs):
            r1 = sum(1 for e in pairs if labeled.label(*e) == 1)
            r12 = r1 + sum(1 for e in pairs if labeled.label(*e) == 2)
            return (r12, r1)

        best = max(key(m) for m in all_perfect_matchings(list(range(8))))
        if key(matching.sorted_edges()) != best:
            canon_bad += 1
    ok = mismatches == 0 and ged_bad == 0 and canon_bad == 0
    _criterion(6, ok,
               f"500 graphs |V|<=18: {mismatches} matching mismatches, "
               f"{ged_bad} decomposition identity failures; 100 labeled "
               f"cliques k=8: {canon_bad} canonical-matching mismatches")


def test_criterion_7_simulation_ordering(sim16):
    med = {v: median_size(b) for v, b in sim16.items()}
    monotone = med["greedy"] <= med["one_round"] <= med["three_round"]
    complete = all(s.positive_complete for b in sim16.values() for s in b)
    budgets = all(s.budgets_ok for b in sim16.values() for s in b)
    ok = monotone and complete and budgets
    _criterion(7, ok,
               f"n=2^16 medians over 30 seeds: greedy {med['greedy']}, "
               f"one_round {med['one_round']}, three_round "
               f"{med['three_round']} (monotone={monotone}), "
               f"positive-completeness {complete}, budgets {budgets}")


def test_criterion_8_byte_identical_reruns(tmp_path):
    commands = {
        "simulate.csv": ("simulate", "--variant", "one_round", "--n", "512",
                         "--delta", "1.0", "--seeds", "3", "--jobs", "1"),
        "bounds.csv": ("bounds", "--grid", "1.0:1.9:0.1", "--plot", "b.svg"),
        "verify.csv": ("verify", "--instances", "5", "--graph-n", "10",
                       "--k", "8"),
        "table1.csv": ("table1", "--deltas", "1.2", "--net-eps", "0.25"),
        "optimize.json": ("optimize", "--slack", "1.0", "--eps-target",
                          "0.01", "--audit-points", "5000",
                          "--gamma-samples", "10"),
        "transcript.txt": ("transcript", "dump", "--variant", "three_round",
                           "--n", "256", "--seed", "1"),
    }
    extra = {"bounds.csv": ["b.svg"], "optimize.json": ["optimize_boxes.csv"]}
    unstable = []
    for artifact, argv in commands.items():
        d1 = tmp_path / f"a-{artifact}"
        d2 = tmp_path / f"b-{artifact}"
        rc1 = main(["--out-dir", str(d1)] + list(argv))
        rc2 = main(["--out-dir", str(d2)] + list(argv))
        assert rc1 == rc2 == 0, (artifact, rc1, rc2)
        for name in [artifact] + extra.get(artifact, []):
            if (d1 / name).read_bytes() != (d2 / name).read_bytes():
                unstable.append(name)
    ok = not unstable
    _criterion(8, ok,
               f"{len(commands)} commands rerun, "
               + ("all artifacts byte-identical" if ok
                  else f"unstable artifacts: {', '.join(unstable)}"))
