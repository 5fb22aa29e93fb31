"""Independent reference implementations used only by the test suite.

Each function here recomputes a quantity the package computes, by a
different method, so the two can be cross-checked on small instances.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import networkx as nx

from cliquequery.graphs import SimpleGraph


def nu_subset_dp(graph: SimpleGraph) -> int:
    """Maximum matching size by exact DP over vertex subsets (n <= ~18)."""
    n = graph.n
    if n == 0:
        return 0
    adj = [0] * n
    for u in range(n):
        for v in graph.adj(u):
            adj[u] |= 1 << v
    full = (1 << n) - 1
    dp = [0] * (full + 1)
    for mask in range(1, full + 1):
        low = mask & -mask
        v = low.bit_length() - 1
        rest = mask ^ low
        best = dp[rest]  # leave v unmatched
        cand = adj[v] & rest
        while cand:
            ub = cand & -cand
            cand ^= ub
            val = dp[rest ^ ub] + 1
            if val > best:
                best = val
        dp[mask] = best
    return dp[full]


def avoidable_by_deletion_dp(graph: SimpleGraph) -> frozenset:
    """Vertices missed by some maximum matching, via the subset DP (small n)."""
    nu = nu_subset_dp(graph)
    out = set()
    for v in range(graph.n):
        keep = [u for u in range(graph.n) if u != v]
        idx = {u: i for i, u in enumerate(keep)}
        h = SimpleGraph(len(keep))
        for a, b in graph.edges():
            if a != v and b != v:
                h.add_edge(idx[a], idx[b])
        if nu_subset_dp(h) == nu:
            out.add(v)
    return frozenset(out)


def perfect_matchings(k: int):
    """All perfect matchings of the complete graph on 0..k-1."""
    verts = tuple(range(k))

    def rec(avail):
        if not avail:
            yield ()
            return
        v = avail[0]
        for i in range(1, len(avail)):
            u = avail[i]
            rest = avail[1:i] + avail[i + 1 :]
            for tail in rec(rest):
                yield ((v, u),) + tail

    yield from rec(verts)


def best_split_by_enumeration(labeled) -> tuple[Fraction, Fraction]:
    """Lexicographic max of (m1+m2, m1) over all perfect matchings."""
    k = labeled.k
    best = None
    for pm in perfect_matchings(k):
        c1 = sum(1 for u, v in pm if labeled.label(u, v) == 1)
        c12 = sum(1 for u, v in pm if labeled.label(u, v) <= 2)
        key = (c12, c1)
        if best is None or key > best:
            best = key
    return Fraction(best[0], k), Fraction(best[1], k)


def max_clique_brute(graph: SimpleGraph) -> tuple[int, tuple]:
    """(omega, lexicographically smallest maximum clique) via Bron-Kerbosch."""
    g = nx.Graph()
    g.add_nodes_from(range(graph.n))
    g.add_edges_from(graph.edges())
    best_size = 0
    best = ()
    for clique in nx.find_cliques(g):
        cand = tuple(sorted(clique))
        if len(cand) > best_size or (len(cand) == best_size and cand < best):
            best_size = len(cand)
            best = cand
    return best_size, best
