"""Simple undirected graphs and an exact maximum-clique solver.

The solver is a bitset branch-and-bound with a greedy-coloring upper bound.
Candidate sets are relabeled into machine words (python ints), so it is fast
for the dense few-hundred-vertex subgraphs the search algorithms produce, and
exact everywhere.
"""

from __future__ import annotations

from typing import Iterable, Sequence


class SimpleGraph:
    """Undirected simple graph on vertices 0..n-1, set-based adjacency."""

    __slots__ = ("n", "_adj", "_m")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise ValueError(f"vertex count must be >= 0, got {n}")
        self.n = n
        self._adj: list[set[int]] = [set() for _ in range(n)]
        self._m = 0
        for u, v in edges:
            self.add_edge(u, v)

    @classmethod
    def from_edge_arrays(cls, n: int, us, vs) -> "SimpleGraph":
        g = cls(n)
        for u, v in zip(us, vs):
            g.add_edge(int(u), int(v))
        return g

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise ValueError(f"vertex {v} out of range [0, {self.n})")

    def add_edge(self, u: int, v: int) -> None:
        self._check_vertex(u)
        self._check_vertex(v)
        if u == v:
            raise ValueError(f"self-loop at vertex {u}")
        if v not in self._adj[u]:
            self._adj[u].add(v)
            self._adj[v].add(u)
            self._m += 1

    def has_edge(self, u: int, v: int) -> bool:
        self._check_vertex(u)
        self._check_vertex(v)
        return v in self._adj[u]

    def adj(self, v: int) -> set[int]:
        """Neighbor set of v. Treat as read-only."""
        self._check_vertex(v)
        return self._adj[v]

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return len(self._adj[v])

    @property
    def edge_count(self) -> int:
        return self._m

    def edges(self) -> list[tuple[int, int]]:
        """All edges as (u, v) with u < v, sorted."""
        out = []
        for u in range(self.n):
            for v in self._adj[u]:
                if u < v:
                    out.append((u, v))
        out.sort()
        return out

    def __repr__(self) -> str:  # pragma: no cover
        return f"SimpleGraph(n={self.n}, m={self._m})"


def is_clique(graph: SimpleGraph, verts: Sequence[int]) -> bool:
    vs = list(verts)
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            if not graph.has_edge(vs[i], vs[j]):
                return False
    return True


def _color_sort(P: int, adj: list[int], nadj: list[int]) -> tuple[list[int], list[int]]:
    # Greedy coloring of the candidate set; emits vertices grouped by color
    # class, so the color list is nondecreasing and colors[i] bounds the size
    # of any clique inside order[:i+1].
    order: list[int] = []
    colors: list[int] = []
    ap_o = order.append
    ap_c = colors.append
    rest = P
    color = 0
    while rest:
        color += 1
        avail = rest
        while avail:
            b = avail & -avail
            v = b.bit_length() - 1
            ap_o(v)
            ap_c(color)
            rest ^= b
            avail = (avail ^ b) & nadj[v]
    return order, colors


def _expand(adj: list[int], nadj: list[int], rmask: int, rsize: int, P: int, best: list) -> None:
    order, colors = _color_sort(P, adj, nadj)
    remaining = P
    for i in range(len(order) - 1, -1, -1):
        if rsize + colors[i] <= best[0]:
            return
        v = order[i]
        bit = 1 << v
        remaining ^= bit
        new_p = remaining & adj[v]
        if new_p:
            _expand(adj, nadj, rmask | bit, rsize + 1, new_p, best)
        elif rsize + 1 > best[0]:
            best[0] = rsize + 1
            best[1] = rmask | bit


def _collect_ties(
    adj: list[int],
    nadj: list[int],
    rmask: int,
    rsize: int,
    P: int,
    target: int,
    state: list,
    to_orig,
) -> None:
    # Enumerate every clique of size == target (pruning only strictly
    # hopeless subtrees) and keep the lexicographically smallest in the
    # graph's original vertex labels.
    order, colors = _color_sort(P, adj, nadj)
    remaining = P
    for i in range(len(order) - 1, -1, -1):
        if rsize + colors[i] < target:
            return
        v = order[i]
        bit = 1 << v
        remaining ^= bit
        new_p = remaining & adj[v]
        if rsize + 1 == target:
            cand = to_orig(rmask | bit)
            if _lex_less(cand, state[0]):
                state[0] = cand
        elif new_p:
            _collect_ties(adj, nadj, rmask | bit, rsize + 1, new_p, target, state, to_orig)


def _lex_less(a: int, b: int) -> bool:
    """Compare equal-size vertex bitmasks as ascending-sorted vertex tuples."""
    if a == b:
        return False
    low = (a ^ b) & -(a ^ b)  # smallest differing vertex
    return bool(a & low)


def _greedy_lower_bound(adj: list[int], m: int) -> tuple[int, int]:
    # Cheap clique to seed the bound: descend from high-degree roots.
    best_size, best_mask = 0, 0
    degs = sorted(range(m), key=lambda v: -adj[v].bit_count())
    for start in degs[: min(8, m)]:
        mask = 1 << start
        size = 1
        cand = adj[start]
        while cand:
            v = (cand & -cand).bit_length() - 1
            mask |= 1 << v
            size += 1
            cand &= adj[v]
        if size > best_size:
            best_size, best_mask = size, mask
    return best_size, best_mask


def max_clique(graph: SimpleGraph, candidates: Iterable[int] | None = None) -> list[int]:
    """Exact maximum clique, restricted to `candidates` if given.

    Returns the lexicographically smallest maximum clique (as a sorted vertex
    list), so results are deterministic and ties are broken reproducibly.
    Two passes: a branch-and-bound for the clique number, then an
    equality-tolerant enumeration that keeps the lexicographic minimum.
    """
    verts = sorted(set(candidates)) if candidates is not None else list(range(graph.n))
    for v in verts:
        graph._check_vertex(v)
    m = len(verts)
    if m == 0:
        return []
    index = {v: i for i, v in enumerate(verts)}
    base_adj = [0] * m
    for i, v in enumerate(verts):
        mask = 0
        for w in graph.adj(v):
            j = index.get(w)
            if j is not None:
                mask |= 1 << j
        base_adj[i] = mask

    # Search in degree-descending order: tightens the greedy coloring, which
    # is the whole pruning power of the search.
    perm = sorted(range(m), key=lambda i: (-base_adj[i].bit_count(), i))
    pos_of = [0] * m
    for p, i in enumerate(perm):
        pos_of[i] = p
    adj = [0] * m
    for p, i in enumerate(perm):
        mask = base_adj[i]
        t = 0
        while mask:
            b = mask & -mask
            mask ^= b
            t |= 1 << pos_of[b.bit_length() - 1]
        adj[p] = t
    nadj = [~a for a in adj]

    def to_orig(mask: int) -> int:
        out = 0
        while mask:
            b = mask & -mask
            mask ^= b
            out |= 1 << perm[b.bit_length() - 1]
        return out

    full = (1 << m) - 1
    lb_size, lb_mask = _greedy_lower_bound(adj, m)
    best = [lb_size, lb_mask]
    _expand(adj, nadj, 0, 0, full, best)
    omega = best[0]

    state = [to_orig(best[1])]
    _collect_ties(adj, nadj, 0, 0, full, omega, state, to_orig)
    mask = state[0]
    out = []
    while mask:
        b = mask & -mask
        mask ^= b
        out.append(verts[b.bit_length() - 1])
    return out
