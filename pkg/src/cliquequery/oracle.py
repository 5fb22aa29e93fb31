"""Seeded lazy edge oracle for G(n, 1/2), round budgets, and transcripts.

Each vertex pair gets an independent fair coin determined by (seed, u, v)
through a 64-bit keyed mixing function, so the graph never has to be
materialized: answers are reproducible on demand, identical between the
scalar and the vectorized paths, and budgets only meter what is asked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import SimpleGraph

_MASK64 = (1 << 64) - 1
_INC = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB


def _mix64(z: int) -> int:
    # splitmix64 finalizer: full-avalanche bijection on 64-bit words
    z = (z + _INC) & _MASK64
    z = ((z ^ (z >> 30)) * _MUL1) & _MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & _MASK64
    return z ^ (z >> 31)


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(_INC)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MUL1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MUL2)
    return z ^ (z >> np.uint64(31))


class BudgetViolationError(ValueError):
    """A round submission exceeds its query budget."""

    def __init__(self, round_index: int, submitted: int, budget: int):
        self.round_index = round_index
        self.submitted = submitted
        self.budget = budget
        super().__init__(
            f"round {round_index + 1}: {submitted} queries exceed budget "
            f"{budget} by {submitted - budget}"
        )


class ScheduleExhaustedError(ValueError):
    """More rounds submitted than the schedule allows."""


class TranscriptFormatError(ValueError):
    """Malformed transcript text."""


def edge_key(u: int, v: int, n: int | None = None) -> tuple[int, int]:
    """Canonical (min, max) vertex pair; rejects loops and out-of-range ids."""
    if u == v:
        raise ValueError(f"self-pair ({u}, {v}) is not an edge")
    if u < 0 or v < 0:
        raise ValueError(f"negative vertex in pair ({u}, {v})")
    if n is not None and (u >= n or v >= n):
        raise ValueError(f"pair ({u}, {v}) out of range for n={n}")
    return (u, v) if u < v else (v, u)


def _pack(u: int, v: int) -> int:
    # assumes u < v; lexicographic order of (u, v) == numeric order of packed key
    return (u << 32) | v


def _unpack(key: int) -> tuple[int, int]:
    return key >> 32, key & 0xFFFFFFFF


class QueryOracle:
    """Answers edge queries for one realization of G(n, 1/2)."""

    __slots__ = ("n", "seed", "_sk")

    def __init__(self, n: int, seed: int):
        if n < 2:
            raise ValueError(f"need at least 2 vertices, got n={n}")
        self.n = n
        self.seed = seed
        self._sk = _mix64(seed & _MASK64)

    def answer(self, u: int, v: int) -> bool:
        """True iff the edge {u, v} is present."""
        a, b = edge_key(u, v, self.n)
        return bool(_mix64(_pack(a, b) ^ self._sk) >> 63)

    def answer_batch(self, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
        """Vectorized `answer`; bit-identical to the scalar path."""
        us = np.asarray(us, dtype=np.uint64)
        vs = np.asarray(vs, dtype=np.uint64)
        lo = np.minimum(us, vs)
        hi = np.maximum(us, vs)
        if lo.size and (int(hi.max()) >= self.n or np.any(lo == hi)):
            raise ValueError("batch contains an out-of-range vertex or a self-pair")
        keys = (lo << np.uint64(32)) | hi
        return (_mix64_np(keys ^ np.uint64(self._sk)) >> np.uint64(63)).astype(bool)


def create_oracle(n: int, seed: int) -> QueryOracle:
    return QueryOracle(n, seed)


@dataclass(frozen=True)
class Schedule:
    """Per-round query budgets floor(n**delta_i) for exponents delta_i."""

    n: int
    deltas: tuple[float, ...]

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 vertices, got n={self.n}")
        deltas = tuple(float(d) for d in self.deltas)
        object.__setattr__(self, "deltas", deltas)
        if not deltas:
            raise ValueError("schedule needs at least one round")
        for i, d in enumerate(deltas):
            if not 0.0 < d < 2.0:
                raise ValueError(f"round {i + 1}: exponent {d} outside (0, 2)")

    @property
    def rounds(self) -> int:
        return len(self.deltas)

    def budget(self, i: int) -> int:
        """Budget of 0-based round i."""
        if not 0 <= i < self.rounds:
            raise IndexError(f"round index {i} outside schedule of {self.rounds} rounds")
        # tiny epsilon so exact powers (e.g. delta=1) do not round down
        return int(math.floor(self.n ** self.deltas[i] + 1e-9))

    @property
    def budgets(self) -> tuple[int, ...]:
        return tuple(self.budget(i) for i in range(self.rounds))


class Transcript:
    """Record of all queries asked so far, in rounds.

    Repeated edges are re-answered from the stored record (consistency), and
    still count against the budget of the round that re-asks them.
    """

    def __init__(self, schedule: Schedule | None, n: int, seed: int):
        if schedule is not None and schedule.n != n:
            raise ValueError(f"schedule n={schedule.n} != transcript n={n}")
        self.schedule = schedule
        self.n = n
        self.seed = seed
        self._rounds: list[tuple[np.ndarray, np.ndarray]] = []  # (sorted keys, answers)

    def _find(self, keys: np.ndarray) -> np.ndarray:
        """Recorded answer per key (-1 where never queried)."""
        out = np.full(keys.size, -1, dtype=np.int8)
        for rk, ra in self._rounds:
            if rk.size == 0:
                continue
            idx = np.minimum(np.searchsorted(rk, keys), rk.size - 1)
            hit = rk[idx] == keys
            if hit.any():
                out[hit] = ra[idx[hit]]
        return out

    @classmethod
    def for_oracle(cls, oracle: QueryOracle, schedule: Schedule) -> "Transcript":
        return cls(schedule, oracle.n, oracle.seed)

    @property
    def rounds_used(self) -> int:
        return len(self._rounds)

    @property
    def total_queries(self) -> int:
        return sum(len(k) for k, _ in self._rounds)

    def round_queries(self, i: int) -> int:
        return len(self._rounds[i][0])

    def round_edges(self, i: int) -> list[tuple[int, int, int]]:
        """Round i (0-based) as sorted (u, v, answer) triples."""
        keys, ans = self._rounds[i]
        return [(_unpack(int(k)) + (int(a),)) for k, a in zip(keys, ans)]

    def submit_arrays(self, oracle: QueryOracle, us, vs) -> np.ndarray:
        """Submit one round given parallel vertex arrays; answers in input order.

        Input pairs are canonicalized and deduplicated; the deduplicated count
        is what the budget meters.
        """
        if oracle.n != self.n or oracle.seed != self.seed:
            raise ValueError("oracle does not match transcript (n or seed differ)")
        rnd = len(self._rounds)
        if self.schedule is None:
            raise ValueError("transcript has no schedule; cannot accept submissions")
        if rnd >= self.schedule.rounds:
            raise ScheduleExhaustedError(
                f"schedule has {self.schedule.rounds} rounds, round {rnd + 1} submitted"
            )
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        if us.shape != vs.shape:
            raise ValueError("vertex arrays must have equal length")
        if us.size and (us.min() < 0 or vs.min() < 0 or max(us.max(), vs.max()) >= self.n):
            raise ValueError("vertex id out of range")
        if np.any(us == vs):
            raise ValueError("self-pair submitted")
        lo = np.minimum(us, vs).astype(np.uint64)
        hi = np.maximum(us, vs).astype(np.uint64)
        keys = (lo << np.uint64(32)) | hi
        uniq = np.unique(keys)
        budget = self.schedule.budget(rnd)
        if uniq.size > budget:
            raise BudgetViolationError(rnd, int(uniq.size), budget)

        prior = self._find(uniq)
        known_mask = prior >= 0
        answers = np.empty(uniq.size, dtype=np.uint8)
        answers[known_mask] = prior[known_mask].astype(np.uint8)
        fresh = uniq[~known_mask]
        if fresh.size:
            answers[~known_mask] = (
                _mix64_np(fresh ^ np.uint64(oracle._sk)) >> np.uint64(63)
            ).astype(np.uint8)
        self._rounds.append((uniq, answers))

        # answers aligned with the submitted order
        pos = np.searchsorted(uniq, keys)
        return answers[pos].astype(bool)

    def submit(self, oracle: QueryOracle, edges) -> dict[tuple[int, int], bool]:
        """Submit one round as an edge set; returns {edge_key: present}."""
        pairs = [edge_key(u, v, self.n) for (u, v) in edges]
        if not pairs:
            # an empty round still consumes a schedule slot
            rnd = len(self._rounds)
            if self.schedule is None:
                raise ValueError("transcript has no schedule; cannot accept submissions")
            if rnd >= self.schedule.rounds:
                raise ScheduleExhaustedError(
                    f"schedule has {self.schedule.rounds} rounds, round {rnd + 1} submitted"
                )
            self._rounds.append(
                (np.empty(0, dtype=np.uint64), np.empty(0, dtype=np.uint8))
            )
            return {}
        us = np.fromiter((p[0] for p in pairs), dtype=np.int64, count=len(pairs))
        vs = np.fromiter((p[1] for p in pairs), dtype=np.int64, count=len(pairs))
        ans = self.submit_arrays(oracle, us, vs)
        return {p: bool(a) for p, a in zip(pairs, ans)}

    def lookup(self, u: int, v: int) -> int:
        """-1 if the pair was never queried, else 0/1."""
        a, b = edge_key(u, v, self.n)
        return int(self._find(np.array([_pack(a, b)], dtype=np.uint64))[0])

    def lookup_batch(self, us, vs) -> np.ndarray:
        us = np.asarray(us, dtype=np.uint64)
        vs = np.asarray(vs, dtype=np.uint64)
        lo = np.minimum(us, vs)
        hi = np.maximum(us, vs)
        return self._find((lo << np.uint64(32)) | hi)

    def positive_edges(self, upto: int | None = None) -> list[tuple[int, int]]:
        limit = self.rounds_used if upto is None else upto
        pos = [rk[ra.astype(bool)] for rk, ra in self._rounds[:limit]]
        if not pos:
            return []
        keys = np.unique(np.concatenate(pos))
        return [_unpack(int(k)) for k in keys.tolist()]


def submit_round(
    transcript: Transcript, oracle: QueryOracle, edges
) -> dict[tuple[int, int], bool]:
    """Submit one round of edge queries against the oracle."""
    return transcript.submit(oracle, edges)


def extract_graphs(
    transcript: Transcript, upto: int | None = None
) -> tuple[SimpleGraph, SimpleGraph]:
    """(queried graph Q, positive graph G') from the first `upto` rounds."""
    limit = transcript.rounds_used if upto is None else upto
    if not 0 <= limit <= transcript.rounds_used:
        raise ValueError(f"upto={limit} outside [0, {transcript.rounds_used}]")
    q = SimpleGraph(transcript.n)
    gp = SimpleGraph(transcript.n)
    for keys, ans in transcript._rounds[:limit]:
        for k, a in zip(keys.tolist(), ans.tolist()):
            u, v = _unpack(k)
            q.add_edge(u, v)
            if a:
                gp.add_edge(u, v)
    return q, gp


def random_graph(n: int, seed: int) -> SimpleGraph:
    """The full G(n, 1/2) graph a QueryOracle(n, seed) answers from.

    Materializes every pair, so keep n small (test instances, lemma
    batteries); algorithm runs query the oracle instead.
    """
    oracle = QueryOracle(n, seed)
    iu, iv = np.triu_indices(n, k=1)
    ans = oracle.answer_batch(iu, iv)
    return SimpleGraph.from_edge_arrays(n, iu[ans], iv[ans])


def dump_text(transcript: Transcript) -> str:
    """Serialize: header `n seed rounds`, then per round `round i count`
    followed by `u v answer` lines sorted by (u, v)."""
    lines = [f"{transcript.n} {transcript.seed} {transcript.rounds_used}"]
    for i in range(transcript.rounds_used):
        keys, ans = transcript._rounds[i]
        lines.append(f"round {i + 1} {len(keys)}")
        for k, a in zip(keys.tolist(), ans.tolist()):
            u, v = _unpack(k)
            lines.append(f"{u} {v} {a}")
    return "\n".join(lines) + "\n"


def parse_text(text: str) -> Transcript:
    """Inverse of dump_text. The result is read-only (no schedule attached)."""
    lines = text.splitlines()
    if not lines:
        raise TranscriptFormatError("empty transcript")
    head = lines[0].split()
    if len(head) != 3:
        raise TranscriptFormatError(f"bad header: {lines[0]!r}")
    try:
        n, seed, rounds = int(head[0]), int(head[1]), int(head[2])
    except ValueError as exc:
        raise TranscriptFormatError(f"bad header: {lines[0]!r}") from exc
    t = Transcript(None, n, seed)
    pos = 1
    for i in range(rounds):
        if pos >= len(lines):
            raise TranscriptFormatError(f"missing round {i + 1} header")
        parts = lines[pos].split()
        if len(parts) != 3 or parts[0] != "round" or parts[1] != str(i + 1):
            raise TranscriptFormatError(f"bad round header: {lines[pos]!r}")
        try:
            count = int(parts[2])
        except ValueError as exc:
            raise TranscriptFormatError(f"bad round header: {lines[pos]!r}") from exc
        pos += 1
        keys = np.empty(count, dtype=np.uint64)
        ans = np.empty(count, dtype=np.uint8)
        for j in range(count):
            if pos >= len(lines):
                raise TranscriptFormatError(f"round {i + 1}: expected {count} edges")
            e = lines[pos].split()
            if len(e) != 3:
                raise TranscriptFormatError(f"bad edge line: {lines[pos]!r}")
            try:
                u, v, a = int(e[0]), int(e[1]), int(e[2])
            except ValueError as exc:
                raise TranscriptFormatError(f"bad edge line: {lines[pos]!r}") from exc
            if not (0 <= u < v < n):
                raise TranscriptFormatError(f"edge ({u}, {v}) invalid for n={n}")
            if a not in (0, 1):
                raise TranscriptFormatError(f"answer must be 0/1: {lines[pos]!r}")
            keys[j] = _pack(u, v)
            ans[j] = a
            pos += 1
        if np.any(keys[1:] <= keys[:-1]):
            raise TranscriptFormatError(f"round {i + 1}: edges not sorted by (u, v)")
        prior = t._find(keys)
        clash = (prior >= 0) & (prior != ans)
        if clash.any():
            u, v = _unpack(int(keys[np.nonzero(clash)[0][0]]))
            raise TranscriptFormatError(
                f"edge ({u}, {v}) answered inconsistently across rounds"
            )
        t._rounds.append((keys, ans))
    if pos != len(lines):
        raise TranscriptFormatError(f"{len(lines) - pos} trailing lines")
    return t


@dataclass
class AuditReport:
    ok: bool
    issues: list[str]
    rounds: int
    total_queries: int
    budgets_checked: bool
    prf_checked: bool


def audit_transcript(
    transcript: Transcript,
    deltas: tuple[float, ...] | None = None,
    check_prf: bool = True,
) -> AuditReport:
    """Validate a transcript: well-formed keys, cross-round consistency,
    optional budget compliance for a given exponent list, and agreement of
    every recorded answer with the oracle determined by (n, seed)."""
    issues: list[str] = []
    seen: dict[int, int] = {}
    for i in range(transcript.rounds_used):
        keys, ans = transcript._rounds[i]
        if keys.size and np.any(keys[1:] <= keys[:-1]):
            issues.append(f"round {i + 1}: keys not strictly sorted")
        for k, a in zip(keys.tolist(), ans.tolist()):
            u, v = _unpack(k)
            if not (0 <= u < v < transcript.n):
                issues.append(f"round {i + 1}: invalid edge ({u}, {v})")
            prev = seen.get(k)
            if prev is not None and prev != a:
                issues.append(f"round {i + 1}: edge ({u}, {v}) answer flipped")
            seen[k] = a

    budgets_checked = deltas is not None or transcript.schedule is not None
    if budgets_checked:
        sched = (
            Schedule(transcript.n, tuple(deltas))
            if deltas is not None
            else transcript.schedule
        )
        if transcript.rounds_used > sched.rounds:
            issues.append(
                f"{transcript.rounds_used} rounds recorded, schedule has {sched.rounds}"
            )
        for i in range(min(transcript.rounds_used, sched.rounds)):
            used = transcript.round_queries(i)
            if used > sched.budget(i):
                issues.append(
                    f"round {i + 1}: {used} queries exceed budget {sched.budget(i)}"
                )

    if check_prf:
        oracle = QueryOracle(transcript.n, transcript.seed)
        for i in range(transcript.rounds_used):
            keys, ans = transcript._rounds[i]
            if keys.size == 0:
                continue
            expect = (_mix64_np(keys ^ np.uint64(oracle._sk)) >> np.uint64(63)).astype(
                np.uint8
            )
            bad = np.nonzero(expect != ans)[0]
            for j in bad.tolist():
                u, v = _unpack(int(keys[j]))
                issues.append(
                    f"round {i + 1}: edge ({u}, {v}) answer disagrees with seed {transcript.seed}"
                )

    return AuditReport(
        ok=not issues,
        issues=issues,
        rounds=transcript.rounds_used,
        total_queries=transcript.total_queries,
        budgets_checked=budgets_checked,
        prf_checked=check_prf,
    )
