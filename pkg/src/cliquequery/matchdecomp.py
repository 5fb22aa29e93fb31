"""Matchings, graph decompositions, and round-labeled clique structure.

Maximum matchings come from networkx's blossom solver. The avoidable-vertex
decomposition is computed by the per-vertex-deletion characterization, which
costs one matching call per vertex and suits the small instances used here
(k up to a few dozen). Round-labeled cliques get a canonical perfect
matching from an exact subset DP, exact rational free-edge accounting, and
per-instance verification of the structural inequalities the three-round
analysis rests on.
"""

from __future__ import annotations

import random
from array import array
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import networkx as nx

from .errors import DomainError, PreconditionError
from .graphs import SimpleGraph

__all__ = [
    "Matching",
    "GEDecomposition",
    "SpecificDecomposition",
    "RoundLabeledClique",
    "DecompSignature",
    "LemmaCheck",
    "maximum_matching",
    "gallai_edmonds",
    "specific_decomposition",
    "random_labeled_clique",
    "canonical_matching",
    "free_edge_count",
    "v_free_fraction",
    "extract_signature",
    "verify_structure_lemmas",
    "verification_battery",
]


@dataclass(frozen=True)
class Matching:
    """Vertex-disjoint edge set; each edge stored as (min, max)."""

    edges: frozenset

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            if not (isinstance(u, int) and isinstance(v, int)) or u >= v:
                raise PreconditionError(f"matching edge ({u!r}, {v!r}) not (min, max) ints")
            if u in seen or v in seen:
                raise PreconditionError(f"matching edges overlap at vertex {u if u in seen else v}")
            seen.add(u)
            seen.add(v)

    @classmethod
    def from_pairs(cls, pairs) -> "Matching":
        return cls(frozenset((min(int(u), int(v)), max(int(u), int(v))) for u, v in pairs))

    @property
    def size(self) -> int:
        return len(self.edges)

    @property
    def covered(self) -> frozenset:
        return frozenset(v for e in self.edges for v in e)

    def partner_map(self) -> dict:
        pm = {}
        for u, v in self.edges:
            pm[u] = v
            pm[v] = u
        return pm

    def sorted_edges(self) -> list:
        return sorted(self.edges)


def _to_nx(graph: SimpleGraph) -> "nx.Graph":
    g = nx.Graph()
    g.add_nodes_from(range(graph.n))
    g.add_edges_from(graph.edges())
    return g


def _nu(graph_nx) -> int:
    return len(nx.max_weight_matching(graph_nx, maxcardinality=True))


def maximum_matching(graph: SimpleGraph) -> Matching:
    """Maximum-cardinality matching via the blossom solver.

    Maximality is audited inline (no edge joins two uncovered vertices);
    maximum cardinality itself is the solver's contract, cross-validated
    against the subset DP in the test battery.
    """
    raw = nx.max_weight_matching(_to_nx(graph), maxcardinality=True)
    m = Matching.from_pairs(raw)
    uncovered = set(range(graph.n)) - set(m.covered)
    for u in uncovered:
        if graph.adj(u) & uncovered:
            raise AssertionError("matching solver returned a non-maximal matching")
    return m


def _induced(graph: SimpleGraph, verts) -> tuple[SimpleGraph, list]:
    """Induced subgraph on `verts`, relabeled 0..len-1 in sorted order."""
    order = sorted(verts)
    index = {v: i for i, v in enumerate(order)}
    h = SimpleGraph(len(order))
    for u in order:
        for w in graph.adj(u):
            if w > u and w in index:
                h.add_edge(index[u], index[w])
    return h, order


def _components(graph: SimpleGraph, within) -> list:
    """Connected components of the induced subgraph on `within`."""
    within = set(within)
    seen = set()
    comps = []
    for start in sorted(within):
        if start in seen:
            continue
        stack = [start]
        seen.add(start)
        comp = {start}
        while stack:
            v = stack.pop()
            for w in graph.adj(v):
                if w in within and w not in seen:
                    seen.add(w)
                    comp.add(w)
                    stack.append(w)
        comps.append(frozenset(comp))
    return comps


@dataclass(frozen=True)
class GEDecomposition:
    """Avoidable-vertex decomposition of a graph.

    C: vertices missed by some maximum matching; S: their outside
    neighbors; R: the rest. components: connected components of the
    induced subgraph on C (each has odd order).
    """

    C: frozenset
    S: frozenset
    R: frozenset
    components: tuple
    nu: int

    @property
    def odd_component_count(self) -> int:
        return len(self.components)


def gallai_edmonds(graph: SimpleGraph) -> GEDecomposition:
    """Decompose via the deletion characterization: v is in C iff deleting
    v leaves the matching number unchanged."""
    base = _to_nx(graph)
    nu = _nu(base)
    c_set = set()
    for v in range(graph.n):
        g2 = base.copy()
        g2.remove_node(v)
        if _nu(g2) == nu:
            c_set.add(v)
    s_set = set()
    for v in c_set:
        s_set |= graph.adj(v)
    s_set -= c_set
    r_set = set(range(graph.n)) - c_set - s_set
    comps = _components(graph, c_set)

    for comp in comps:
        if len(comp) % 2 == 0:
            raise AssertionError(f"even component of order {len(comp)} inside C")
    if len(comps) - len(s_set) != graph.n - 2 * nu:
        raise AssertionError(
            f"deficiency identity failed: {len(comps)} - {len(s_set)} != {graph.n} - 2*{nu}"
        )
    if len(r_set) % 2:
        raise AssertionError("R has odd order")
    # R is perfectly matched within itself; each component of C is matched
    # internally except for one vertex.
    r_graph, _ = _induced(graph, r_set)
    if _nu(_to_nx(r_graph)) * 2 != len(r_set):
        raise AssertionError("R is not perfectly matched within itself")
    for comp in comps:
        comp_graph, _ = _induced(graph, comp)
        if _nu(_to_nx(comp_graph)) != (len(comp) - 1) // 2:
            raise AssertionError("component of C not internally near-perfectly matched")

    return GEDecomposition(
        C=frozenset(c_set),
        S=frozenset(s_set),
        R=frozenset(r_set),
        components=tuple(sorted(comps, key=min)),
        nu=nu,
    )


@dataclass(frozen=True)
class SpecificDecomposition:
    """Partition relative to one maximum matching: c_plus (C matched into
    S), c_minus (unmatched), s (the GED S), d (everything else)."""

    c_plus: frozenset
    c_minus: frozenset
    s: frozenset
    d: frozenset

    @property
    def c_star(self) -> frozenset:
        return self.c_plus | self.c_minus


def specific_decomposition(
    graph: SimpleGraph, matching: Matching, ged: GEDecomposition | None = None
) -> SpecificDecomposition:
    """Decompose relative to `matching`, which must be maximum."""
    for u, v in matching.edges:
        if not graph.has_edge(u, v):
            raise PreconditionError(f"matching edge ({u}, {v}) is not a graph edge")
    if ged is None:
        ged = gallai_edmonds(graph)
    if matching.size != ged.nu:
        raise PreconditionError(
            f"matching of size {matching.size} is not maximum (nu = {ged.nu})"
        )
    covered = matching.covered
    c_minus = frozenset(v for v in range(graph.n) if v not in covered)
    if not c_minus <= ged.C:
        raise AssertionError("unmatched vertex outside C")
    pm = matching.partner_map()
    c_plus = frozenset(v for v in ged.C if v in pm and pm[v] in ged.S)
    d = frozenset(set(range(graph.n)) - c_plus - c_minus - ged.S)
    c_star = c_plus | c_minus
    for v in c_star:
        if graph.adj(v) & c_star:
            raise AssertionError("C* is not independent")
    for v in d:
        if len(graph.adj(v) & c_star) > 1:
            raise AssertionError(f"D vertex {v} has two neighbors in C*")
    return SpecificDecomposition(c_plus=c_plus, c_minus=c_minus, s=ged.S, d=d)


class RoundLabeledClique:
    """Complete graph on vertices 0..k-1 with a query-round label (1..l)
    on every pair."""

    __slots__ = ("k", "l", "_labels")

    def __init__(self, k: int, l: int, labels: dict):
        if k < 2:
            raise DomainError(f"need k >= 2 vertices, got {k}")
        if l < 1:
            raise DomainError(f"need l >= 1 rounds, got {l}")
        norm = {}
        for (u, v), lab in labels.items():
            if not (0 <= u < k and 0 <= v < k) or u == v:
                raise DomainError(f"pair ({u}, {v}) is not a valid vertex pair")
            key = (min(u, v), max(u, v))
            if key in norm and norm[key] != lab:
                raise DomainError(f"pair {key} labeled twice inconsistently")
            if not (isinstance(lab, int) and 1 <= lab <= l):
                raise DomainError(f"label {lab!r} on pair {key} outside 1..{l}")
            norm[key] = lab
        want = k * (k - 1) // 2
        if len(norm) != want:
            raise DomainError(f"expected {want} labeled pairs, got {len(norm)}")
        self.k = k
        self.l = l
        self._labels = norm

    def label(self, u: int, v: int) -> int:
        key = (min(u, v), max(u, v))
        if key not in self._labels:
            raise DomainError(f"({u}, {v}) is not a pair of this clique")
        return self._labels[key]

    def pairs(self):
        """(u, v, label) in lexicographic pair order."""
        for u, v in combinations(range(self.k), 2):
            yield u, v, self._labels[(u, v)]

    @property
    def pair_count(self) -> int:
        return self.k * (self.k - 1) // 2

    def __repr__(self):
        return f"RoundLabeledClique(k={self.k}, l={self.l})"


def random_labeled_clique(k: int, l: int, seed: int) -> RoundLabeledClique:
    """Uniform independent round labels on every pair."""
    rng = random.Random(seed)
    labels = {(u, v): rng.randint(1, l) for u, v in combinations(range(k), 2)}
    return RoundLabeledClique(k, l, labels)


def canonical_matching(
    labeled: RoundLabeledClique,
) -> tuple[Matching, tuple[Fraction, Fraction, Fraction]]:
    """Perfect matching maximizing (m1 + m2, m1) lexicographically.

    Exact subset DP with per-edge weight (k+1)*[label <= 2] + [label == 1];
    since m1*k <= k/2 < k+1 the weight order equals the lexicographic
    order. Returns the matching and the split (m1, m2, m3) as fractions of
    k, where the third component aggregates every round beyond 2.
    """
    k = labeled.k
    if k % 2:
        raise DomainError(f"perfect matching needs even k, got {k}")
    if k > 24:
        raise DomainError(f"subset DP holds a 2^k table; k={k} > 24 unsupported")
    w = [[0] * k for _ in range(k)]
    for u, v, lab in labeled.pairs():
        weight = (k + 1) * (lab <= 2) + (lab == 1)
        w[u][v] = weight
        w[v][u] = weight

    full = (1 << k) - 1
    dp = array("i", [-1]) * (full + 1)
    dp[0] = 0
    for mask in range(3, full + 1):
        if mask.bit_count() % 2:
            continue
        v = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << v)
        best = -1
        mm = rest
        wv = w[v]
        while mm:
            low = mm & -mm
            u = low.bit_length() - 1
            mm ^= low
            prev = dp[rest ^ low]
            if prev >= 0:
                cand = prev + wv[u]
                if cand > best:
                    best = cand
        dp[mask] = best

    edges = []
    mask = full
    while mask:
        v = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << v)
        mm = rest
        wv = w[v]
        target = dp[mask]
        chosen = -1
        while mm:
            low = mm & -mm
            u = low.bit_length() - 1
            mm ^= low
            if dp[rest ^ low] >= 0 and dp[rest ^ low] + wv[u] == target:
                chosen = u
                break
        if chosen < 0:
            raise AssertionError("DP backtrack failed")
        edges.append((v, chosen))
        mask = rest ^ (1 << chosen)

    m = Matching.from_pairs(edges)
    counts = [0, 0, 0]
    for u, v in m.edges:
        lab = labeled.label(u, v)
        counts[0 if lab == 1 else (1 if lab == 2 else 2)] += 1
    split = tuple(Fraction(c, k) for c in counts)
    return m, split


def _check_perfect(labeled: RoundLabeledClique, matching: Matching) -> None:
    if matching.covered != frozenset(range(labeled.k)):
        raise PreconditionError("matching is not perfect on the clique's vertex set")


def free_edge_count(
    labeled: RoundLabeledClique, matching: Matching, i_star: int
) -> tuple[Fraction, tuple]:
    """Free-edge fraction at horizon i_star, plus the bucket fractions.

    An edge labeled j < i_star is free iff some endpoint's matching edge
    has round r with j < r <= i_star. Bucket e_j (j < i_star) collects the
    non-free label-j edges; bucket e_{i_star} collects every edge labeled
    >= i_star. All fractions are of C(k, 2) and satisfy
    e_free = 1 - sum(e_j) exactly.
    """
    if not 1 <= i_star <= labeled.l:
        raise DomainError(f"i_star={i_star} outside 1..{labeled.l}")
    _check_perfect(labeled, matching)
    match_round = {}
    for u, v in matching.edges:
        r = labeled.label(u, v)
        match_round[u] = r
        match_round[v] = r
    free = 0
    buckets = [0] * (i_star + 1)  # 1-based; buckets[j] = count for e_j
    for u, v, lab in labeled.pairs():
        if lab >= i_star:
            buckets[i_star] += 1
        elif lab < match_round[u] <= i_star or lab < match_round[v] <= i_star:
            free += 1
        else:
            buckets[lab] += 1
    total = labeled.pair_count
    e_free = Fraction(free, total)
    es = tuple(Fraction(buckets[j], total) for j in range(1, i_star + 1))
    assert e_free == 1 - sum(es), "free-edge identity failed"
    return e_free, es


def v_free_fraction(
    labeled: RoundLabeledClique, matching: Matching, i_star: int
) -> Fraction:
    """2 * sum of matching-round fractions beyond i_star."""
    if not 1 <= i_star <= labeled.l:
        raise DomainError(f"i_star={i_star} outside 1..{labeled.l}")
    _check_perfect(labeled, matching)
    late = sum(1 for u, v in matching.edges if labeled.label(u, v) > i_star)
    return Fraction(2 * late, labeled.k)


@dataclass(frozen=True)
class DecompSignature:
    """Exact rational structural parameters of a three-round labeled clique
    under its canonical matching. All entries are fractions of k except the
    e-tuples, which are fractions of C(k, 2)."""

    k: int
    l: int
    m1: Fraction
    m2: Fraction
    m3: Fraction
    s1: Fraction
    d1: Fraction
    s2_tilde: Fraction
    d2_tilde: Fraction
    m1_prime: Fraction
    indep: Fraction
    e: tuple
    e_free: tuple
    v_free: tuple


class _TildeParts:
    """Intermediate objects shared by extract_signature and the verifier."""

    __slots__ = (
        "matching",
        "split",
        "m_edges",
        "k2",
        "m12",
        "spec2",
        "v_m1",
        "v_m23",
        "h_tilde",
        "order",
        "ged_tilde",
        "tilde_spec",
        "m1p_nu",
    )


def _tilde_parts(labeled: RoundLabeledClique, matching: Matching | None) -> _TildeParts:
    if labeled.l != 3:
        raise DomainError(
            f"the tilde decomposition is defined for exactly 3 rounds, got l={labeled.l}"
        )
    canon, split = canonical_matching(labeled)
    if matching is None:
        matching = canon
    else:
        _check_perfect(labeled, matching)
        counts = [0, 0, 0]
        for u, v in matching.edges:
            counts[labeled.label(u, v) - 1] += 1
        given = tuple(Fraction(c, labeled.k) for c in counts)
        if (given[0] + given[1], given[0]) != (split[0] + split[1], split[0]):
            raise PreconditionError(
                f"matching split {given} does not attain the canonical optimum {split}"
            )
        split = given

    k = labeled.k
    p = _TildeParts()
    p.matching = matching
    p.split = split
    by_round = {1: [], 2: [], 3: []}
    for u, v in matching.sorted_edges():
        by_round[labeled.label(u, v)].append((u, v))
    p.m_edges = by_round

    k2 = SimpleGraph(k)
    for u, v, lab in labeled.pairs():
        if lab <= 2:
            k2.add_edge(u, v)
    p.k2 = k2
    p.m12 = Matching.from_pairs(by_round[1] + by_round[2])
    nu_k2 = maximum_matching(k2).size
    if nu_k2 != p.m12.size:
        raise AssertionError(
            f"canonical matching's round-1/2 part ({p.m12.size}) is not maximum "
            f"in the round-<=2 graph (nu={nu_k2})"
        )
    p.spec2 = specific_decomposition(k2, p.m12)
    p.v_m1 = frozenset(v for e in by_round[1] for v in e)
    p.v_m23 = sorted(v for r in (2, 3) for e in by_round[r] for v in e)

    h_tilde, order = _induced(k2, p.v_m23)
    p.h_tilde = h_tilde
    p.order = order
    index = {v: i for i, v in enumerate(order)}
    m2_rel = Matching.from_pairs((index[u], index[v]) for u, v in by_round[2])
    nu_h = maximum_matching(h_tilde).size
    if nu_h != m2_rel.size:
        raise AssertionError(
            f"round-2 part ({m2_rel.size}) is not a maximum matching of the "
            f"tilde graph (nu={nu_h})"
        )
    p.ged_tilde = gallai_edmonds(h_tilde)
    p.tilde_spec = specific_decomposition(h_tilde, m2_rel, ged=p.ged_tilde)
    v_m3_rel = frozenset(index[v] for e in by_round[3] for v in e)
    if p.tilde_spec.c_minus != v_m3_rel:
        raise AssertionError("unmatched tilde vertices differ from the round-3 endpoints")

    m1_graph = SimpleGraph(len(order))
    for i, u in enumerate(order):
        for j in range(i + 1, len(order)):
            if labeled.label(u, order[j]) == 1:
                m1_graph.add_edge(i, j)
    p.m1p_nu = maximum_matching(m1_graph).size
    return p


def extract_signature(
    labeled: RoundLabeledClique, matching: Matching | None = None
) -> DecompSignature:
    """Exact rational signature of a three-round labeled clique.

    Uses the canonical matching when none is given; a supplied matching
    must attain the canonical (m1+m2, m1) optimum. Every identity among
    the parameters is asserted in exact arithmetic.
    """
    p = _tilde_parts(labeled, matching)
    k = labeled.k
    m1, m2, m3 = p.split
    assert m1 + m2 + m3 == Fraction(1, 2), "matching split does not sum to 1/2"

    s1 = Fraction(len(p.spec2.s & p.v_m1), k)
    d1 = Fraction(len(p.spec2.d & p.v_m1), 2 * k)
    assert m1 == s1 + d1, f"m1 = {m1} != s1 + d1 = {s1 + d1}"

    s2t = Fraction(len(p.tilde_spec.s), k)
    d2t = Fraction(len(p.tilde_spec.d), 2 * k)
    assert m2 == s2t + d2t, f"m2 = {m2} != s2~ + d2~ = {s2t + d2t}"

    m1p = Fraction(p.m1p_nu, k)
    indep = Fraction(len(p.tilde_spec.c_star), k)
    assert indep == 1 - 2 * m1 - s2t - 2 * d2t, "independent-set identity failed"
    assert indep == s2t + 2 * m3, "independent-set identity (second form) failed"

    _, es_full = free_edge_count(labeled, p.matching, labeled.l)
    e_free = tuple(
        free_edge_count(labeled, p.matching, i)[0] for i in range(1, labeled.l + 1)
    )
    v_free = tuple(
        v_free_fraction(labeled, p.matching, i) for i in range(1, labeled.l + 1)
    )
    return DecompSignature(
        k=k,
        l=labeled.l,
        m1=m1,
        m2=m2,
        m3=m3,
        s1=s1,
        d1=d1,
        s2_tilde=s2t,
        d2_tilde=d2t,
        m1_prime=m1p,
        indep=indep,
        e=es_full,
        e_free=e_free,
        v_free=v_free,
    )


@dataclass(frozen=True)
class LemmaCheck:
    """One verified inequality: holds iff measured <= bound (exact
    comparison done in rational arithmetic before conversion)."""

    lemma: str
    holds: bool
    measured: float
    bound: float
    slack_used: float


def _check_uncovered_edges(graph: SimpleGraph) -> LemmaCheck:
    m = maximum_matching(graph)
    covered = m.covered
    outside = sum(
        1 for u, v in graph.edges() if u not in covered or v not in covered
    )
    n_cov = len(covered)
    n_unc = graph.n - n_cov
    holds = 2 * outside <= n_cov * n_unc
    return LemmaCheck(
        lemma="uncovered_edges",
        holds=holds,
        measured=float(outside),
        bound=n_cov * n_unc / 2.0,
        slack_used=0.0,
    )


def verify_structure_lemmas(instance, slack_c: float = 4.0) -> list:
    """Per-instance checks of the structural inequalities.

    SimpleGraph: the uncovered-edge bound |E-| <= |V_M| |V_M-| / 2, exact.
    RoundLabeledClique (l=3): under the canonical matching, the cube-free
    bound e_free^3 <= 1/2 + c/k, the zero round-1 degree of avoidable tilde
    vertices, and both product bounds on e_free^2 / e_free^3, each with
    additive slack c/k (c = slack_c, reported per row).
    """
    if isinstance(instance, SimpleGraph):
        return [_check_uncovered_edges(instance)]
    if not isinstance(instance, RoundLabeledClique):
        raise PreconditionError(
            f"expected SimpleGraph or RoundLabeledClique, got {type(instance).__name__}"
        )

    labeled = instance
    k = labeled.k
    p = _tilde_parts(labeled, None)
    sig = extract_signature(labeled, p.matching)
    c = Fraction(slack_c)
    slack = c / k

    checks = []
    efree2 = sig.e_free[1]
    efree3 = sig.e_free[2]

    bound_half = Fraction(1, 2) + slack
    checks.append(
        LemmaCheck(
            lemma="efree3_half",
            holds=efree3 <= bound_half,
            measured=float(efree3),
            bound=float(bound_half),
            slack_used=float(slack),
        )
    )

    deg_max = 0
    v_m23 = set(p.v_m23)
    for v_rel in sorted(p.ged_tilde.C):
        v = p.order[v_rel]
        deg = sum(1 for u in v_m23 if u != v and labeled.label(v, u) == 1)
        deg_max = max(deg_max, deg)
    checks.append(
        LemmaCheck(
            lemma="deg1_avoidable",
            holds=deg_max == 0,
            measured=float(deg_max),
            bound=0.0,
            slack_used=0.0,
        )
    )

    s1, d1 = sig.s1, sig.d1
    s2t, d2t = sig.s2_tilde, sig.d2_tilde
    m1p, m3 = sig.m1_prime, sig.m3
    cross = 2 * (s1 + d1) * (s2t + d2t) + m1p * (s2t + 2 * d2t)
    bound2 = 2 * cross + slack
    checks.append(
        LemmaCheck(
            lemma="efree2_bound",
            holds=efree2 <= bound2,
            measured=float(efree2),
            bound=float(bound2),
            slack_used=float(slack),
        )
    )
    bound3 = 2 * (2 * m3 * (s1 + s2t) + cross) + slack
    checks.append(
        LemmaCheck(
            lemma="efree3_bound",
            holds=efree3 <= bound3,
            measured=float(efree3),
            bound=float(bound3),
            slack_used=float(slack),
        )
    )
    return checks


def verification_battery(
    graph_instances: int = 200,
    clique_instances: int = 200,
    graph_n: int = 12,
    k: int = 10,
    l: int = 3,
    slack_c: float = 4.0,
    base_seed: int = 0,
):
    """Yield (instance_id, size, rounds, LemmaCheck) rows for the standard
    verification battery: random graphs for the uncovered-edge bound, then
    random labeled cliques for the free-edge and degree lemmas."""
    from .oracle import random_graph

    for i in range(graph_instances):
        seed = base_seed + i
        g = random_graph(graph_n, seed)
        for check in verify_structure_lemmas(g, slack_c=slack_c):
            yield f"graph-{seed}", graph_n, 0, check
    for i in range(clique_instances):
        seed = base_seed + i
        labeled = random_labeled_clique(k, l, seed)
        for check in verify_structure_lemmas(labeled, slack_c=slack_c):
            yield f"clique-{seed}", k, l, check
