"""Query strategies: greedy baseline and the one/two/three-round algorithms.

All variants draw their probes through a budgeted Transcript, so budget
compliance is enforced at submission time, and every returned clique can be
re-audited against the recorded positive answers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graphs import SimpleGraph, max_clique
from .oracle import QueryOracle, Schedule, Transcript

VARIANTS = ("greedy", "one_round", "two_small", "two_large", "three_round")

SIX_FIFTHS = 1.2


class MissingQueryError(ValueError):
    """A required pair was never queried in the transcript."""


@dataclass
class AlgorithmResult:
    variant: str
    n: int
    delta: float | None
    seed: int
    clique: tuple[int, ...]
    target_size: float
    success: bool
    round_queries: tuple[int, ...]
    sizes: dict[str, int] = field(default_factory=dict)
    truncated: bool = False
    t_history: tuple[int, ...] | None = None  # greedy: |T| after each round
    transcript: Transcript | None = None

    @property
    def clique_size(self) -> int:
        return len(self.clique)


def _met(size: int, target: float) -> bool:
    return size + 1e-9 >= target


def _pairs_arrays(vertices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    iu, iv = np.triu_indices(vertices.size, 1)
    return vertices[iu], vertices[iv]


def _product_arrays(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.repeat(a, b.size), np.tile(b, a.size)


def _graph_from_answers(n: int, us: np.ndarray, vs: np.ndarray, ans: np.ndarray) -> SimpleGraph:
    return SimpleGraph.from_edge_arrays(n, us[ans], vs[ans])


def budget_fit(budget: int) -> int:
    """Largest m with C(m, 2) <= budget."""
    if budget < 0:
        raise ValueError("budget must be >= 0")
    m = int((1 + math.isqrt(1 + 8 * budget)) // 2)
    while m * (m - 1) // 2 > budget:
        m -= 1
    return m


def common_neighbors(transcript: Transcript, S, T) -> list[int]:
    """T' = members of T adjacent (positively answered) to every vertex of S.

    Every S x T pair must already be in the transcript.
    """
    s_list = sorted(set(S))
    t_arr = np.array(sorted(set(T)), dtype=np.int64)
    if set(s_list) & set(t_arr.tolist()):
        raise ValueError("S and T must be disjoint")
    if t_arr.size == 0:
        return []
    keep = np.ones(t_arr.size, dtype=bool)
    for s in s_list:
        sub = t_arr[keep]
        if sub.size == 0:
            break
        ans = transcript.lookup_batch(np.full(sub.size, s, dtype=np.int64), sub)
        if (ans < 0).any():
            missing = int(sub[np.nonzero(ans < 0)[0][0]])
            raise MissingQueryError(f"pair ({s}, {missing}) was never queried")
        keep[keep] = ans > 0
    return t_arr[keep].tolist()


def greedy_clique(oracle: QueryOracle, n: int) -> AlgorithmResult:
    """Seed-growing baseline: repeatedly adopt the lowest-index candidate and
    drop its non-neighbors; about 2n queries, clique of about log2(n)."""
    if n != oracle.n:
        raise ValueError(f"n={n} disagrees with oracle n={oracle.n}")
    rounds = 4 * math.ceil(math.log2(n)) + 8
    sched = Schedule(n, (1.0,) * rounds)
    tr = Transcript.for_oracle(oracle, sched)
    T = np.arange(n, dtype=np.int64)
    K: list[int] = []
    history: list[int] = []
    while T.size > 1 and tr.rounds_used < sched.rounds:
        t0 = int(T[0])
        rest = T[1:]
        ans = tr.submit_arrays(oracle, np.full(rest.size, t0, dtype=np.int64), rest)
        K.append(t0)
        T = rest[ans]
        history.append(int(T.size))
    if T.size == 1:
        K.append(int(T[0]))
    target = math.log2(n)
    return AlgorithmResult(
        variant="greedy",
        n=n,
        delta=None,
        seed=oracle.seed,
        clique=tuple(K),
        target_size=target,
        success=_met(len(K), target),
        round_queries=tuple(tr.round_queries(i) for i in range(tr.rounds_used)),
        sizes={"K": len(K)},
        t_history=tuple(history),
        transcript=tr,
    )


def variant_plan(variant: str, n: int, delta: float) -> dict:
    """Set sizes and round exponents a variant will use, before any query.

    Sizing starts from the nominal power-law sizes and shrinks S (then T) one
    vertex at a time if integer rounding overshoots the round-1 budget.
    """
    if n < 2:
        raise ValueError(f"need at least 2 vertices, got n={n}")
    if variant == "one_round":
        if not 1.0 <= delta < 2.0:
            raise ValueError(f"one_round needs 1 <= delta < 2, got {delta}")
        deltas = (delta,)
        b1 = Schedule(n, deltas).budget(0)
        s = max(1, math.floor(n ** (delta / 2) + 1e-9))
        while s * (s - 1) // 2 > b1:
            s -= 1
        return {"variant": variant, "deltas": deltas, "S": s}
    if variant == "two_small":
        if not 1.0 <= delta <= SIX_FIFTHS:
            raise ValueError(f"two_small needs 1 <= delta <= 6/5, got {delta}")
        deltas = (delta, delta)
        b1 = Schedule(n, deltas).budget(0)
        s = max(1, math.floor(n ** (delta / 6) + 1e-9))
        t_nom = math.floor(n ** (5 * delta / 6) + 1e-9)
        t = min(t_nom, n - s)
        while s > 1 and s * (s - 1) // 2 + s * t > b1:
            s -= 1
            t = min(t_nom, n - s)
        while t > 1 and s * (s - 1) // 2 + s * t > b1:
            t -= 1
        if s * (s - 1) // 2 + s * t > b1:
            raise ValueError(f"cannot fit round 1 of two_small at n={n}, delta={delta}")
        cap = max(1, math.floor(n ** (delta / 2) + 1e-9))
        return {"variant": variant, "deltas": deltas, "S": s, "T": t, "T_prime_cap": cap}
    if variant == "two_large":
        if not SIX_FIFTHS <= delta < 2.0:
            raise ValueError(f"two_large needs 6/5 <= delta < 2, got {delta}")
        deltas = (1.5 - delta / 4, delta)
        sched = Schedule(n, deltas)
        b1 = sched.budget(0)
        s = max(1, math.floor(n ** ((1 - delta / 2) / 2) + 1e-9))
        t = n - s
        while s > 1 and s * (s - 1) // 2 + s * t > b1:
            s -= 1
            t = n - s
        if s * (s - 1) // 2 + s * t > b1:
            raise ValueError(f"cannot fit round 1 of two_large at n={n}, delta={delta}")
        cap = budget_fit(sched.budget(1))
        return {"variant": variant, "deltas": deltas, "S": s, "T": t, "T_prime_cap": cap}
    if variant == "three_round":
        if not 1.0 <= delta < 2.0:
            raise ValueError(f"three_round needs 1 <= delta < 2, got {delta}")
        deltas = (1.0 - delta / 2, 1.0, delta)
        sched = Schedule(n, deltas)
        b1 = sched.budget(0)
        s = max(1, math.floor(n ** ((1 - delta / 2) / 2) + 1e-9))
        while s > 1 and s * (s - 1) // 2 > b1:
            s -= 1
        cap = budget_fit(sched.budget(2))
        return {"variant": variant, "deltas": deltas, "S": s, "T_prime_cap": cap}
    raise ValueError(f"unknown variant {variant!r}")


def run_algorithm(variant: str, oracle: QueryOracle, n: int, delta: float) -> AlgorithmResult:
    """Run one bounded-round variant end to end against the oracle."""
    if n != oracle.n:
        raise ValueError(f"n={n} disagrees with oracle n={oracle.n}")
    if variant == "greedy":
        return greedy_clique(oracle, n)
    plan = variant_plan(variant, n, delta)
    sched = Schedule(n, plan["deltas"])
    tr = Transcript.for_oracle(oracle, sched)
    log_n = math.log2(n)

    if variant == "one_round":
        s = plan["S"]
        S = np.arange(s, dtype=np.int64)
        us, vs = _pairs_arrays(S)
        ans = tr.submit_arrays(oracle, us, vs)
        g = _graph_from_answers(n, us, vs, ans)
        K = max_clique(g, candidates=S.tolist())
        target = delta * log_n
        return AlgorithmResult(
            variant=variant,
            n=n,
            delta=delta,
            seed=oracle.seed,
            clique=tuple(K),
            target_size=target,
            success=_met(len(K), target),
            round_queries=(tr.round_queries(0),),
            sizes={"S": s, "S_prime": len(K)},
            transcript=tr,
        )

    if variant in ("two_small", "two_large"):
        s, t = plan["S"], plan["T"]
        S = np.arange(s, dtype=np.int64)
        T = np.arange(s, s + t, dtype=np.int64)
        pu, pv = _pairs_arrays(S)
        xu, xv = _product_arrays(S, T)
        us = np.concatenate([pu, xu])
        vs = np.concatenate([pv, xv])
        ans = tr.submit_arrays(oracle, us, vs)
        g1 = _graph_from_answers(n, us[: pu.size], vs[: pu.size], ans[: pu.size])
        S_prime = max_clique(g1, candidates=S.tolist())
        T_prime = common_neighbors(tr, S_prime, T.tolist())
        truncated = False
        cap = plan["T_prime_cap"]
        if len(T_prime) > cap:
            T_prime = T_prime[:cap]
            truncated = True
        target = (4 * delta / 3 if variant == "two_small" else 1 + delta / 2) * log_n
        sizes = {
            "S": s,
            "T": t,
            "S_prime": len(S_prime),
            "T_prime": len(T_prime),
        }
        if not T_prime:
            return AlgorithmResult(
                variant=variant,
                n=n,
                delta=delta,
                seed=oracle.seed,
                clique=tuple(S_prime),
                target_size=target,
                success=False,
                round_queries=(tr.round_queries(0), 0),
                sizes=sizes | {"T_second": 0},
                truncated=truncated,
                transcript=tr,
            )
        tp = np.array(T_prime, dtype=np.int64)
        u2, v2 = _pairs_arrays(tp)
        ans2 = tr.submit_arrays(oracle, u2, v2)
        g2 = _graph_from_answers(n, u2, v2, ans2)
        T_second = max_clique(g2, candidates=T_prime) if T_prime else []
        K = sorted(S_prime + T_second)
        sizes["T_second"] = len(T_second)
        return AlgorithmResult(
            variant=variant,
            n=n,
            delta=delta,
            seed=oracle.seed,
            clique=tuple(K),
            target_size=target,
            success=_met(len(K), target),
            round_queries=(tr.round_queries(0), tr.round_queries(1)),
            sizes=sizes,
            truncated=truncated,
            transcript=tr,
        )

    if variant == "three_round":
        s = plan["S"]
        S = np.arange(s, dtype=np.int64)
        pu, pv = _pairs_arrays(S)
        ans1 = tr.submit_arrays(oracle, pu, pv)
        g1 = _graph_from_answers(n, pu, pv, ans1)
        S_prime = max_clique(g1, candidates=S.tolist())
        t = min(n // len(S_prime), n - s)
        T = np.arange(s, s + t, dtype=np.int64)
        sp = np.array(S_prime, dtype=np.int64)
        xu, xv = _product_arrays(sp, T)
        tr.submit_arrays(oracle, xu, xv)
        T_prime = common_neighbors(tr, S_prime, T.tolist())
        truncated = False
        cap = plan["T_prime_cap"]
        if len(T_prime) > cap:
            T_prime = T_prime[:cap]
            truncated = True
        target = (1 + delta / 2) * log_n
        sizes = {"S": s, "S_prime": len(S_prime), "T": t, "T_prime": len(T_prime)}
        if not T_prime:
            return AlgorithmResult(
                variant=variant,
                n=n,
                delta=delta,
                seed=oracle.seed,
                clique=tuple(S_prime),
                target_size=target,
                success=False,
                round_queries=(tr.round_queries(0), tr.round_queries(1), 0),
                sizes=sizes | {"T_second": 0},
                truncated=truncated,
                transcript=tr,
            )
        tp = np.array(T_prime, dtype=np.int64)
        u3, v3 = _pairs_arrays(tp)
        ans3 = tr.submit_arrays(oracle, u3, v3)
        g3 = _graph_from_answers(n, u3, v3, ans3)
        T_second = max_clique(g3, candidates=T_prime)
        K = sorted(S_prime + T_second)
        sizes["T_second"] = len(T_second)
        return AlgorithmResult(
            variant=variant,
            n=n,
            delta=delta,
            seed=oracle.seed,
            clique=tuple(K),
            target_size=target,
            success=_met(len(K), target),
            round_queries=tuple(tr.round_queries(i) for i in range(3)),
            sizes=sizes,
            truncated=truncated,
            transcript=tr,
        )

    raise ValueError(f"unknown variant {variant!r}")


def audit_result(result: AlgorithmResult) -> bool:
    """Re-check a result against its transcript: K is a clique of positive
    answers and every round stayed within budget."""
    tr = result.transcript
    if tr is None:
        raise ValueError("result carries no transcript")
    K = list(result.clique)
    for i in range(len(K)):
        for j in range(i + 1, len(K)):
            if tr.lookup(K[i], K[j]) != 1:
                return False
    if tr.schedule is not None:
        for i in range(tr.rounds_used):
            if tr.round_queries(i) > tr.schedule.budget(i):
                return False
    return True
