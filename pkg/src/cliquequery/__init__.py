"""Workbench for bounded-round clique search in G(n, 1/2).

Simulation side: a seeded lazy edge oracle, query-budget schedules, transcript
recording, and the greedy / one-, two-, three-round clique algorithms.
Analysis side: closed-form bound curves, matching-based clique decompositions
with finite-size lemma checks, and a certified branch-and-prune optimizer for
the three-round feasibility problem.
"""

__version__ = "0.1.0"

from .oracle import QueryOracle, Schedule, Transcript, create_oracle, submit_round
from .graphs import SimpleGraph, max_clique

__all__ = [
    "QueryOracle",
    "Schedule",
    "Transcript",
    "create_oracle",
    "submit_round",
    "SimpleGraph",
    "max_clique",
    "__version__",
]
