"""Closed-form clique-exponent bounds and the two-round proof curves.

Pure double-precision formula evaluators with strict domain checking (no
clamping). `closed_form_bound` covers the headline bounds per budget
exponent, `gen_lemma_bound` the multi-round matching bound, and the
two-round curve helpers expose the internal quantities the verification
pipeline and the plotting CLI consume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError

__all__ = [
    "KINDS",
    "DomainError",
    "BoundTerm",
    "RestrictedPeakReport",
    "closed_form_bound",
    "gen_lemma_terms",
    "gen_lemma_bound",
    "two_round_curves",
    "restricted_m_star",
    "crossing_root",
    "crossing_cubic",
    "restricted_peak_check",
    "bound_grid",
]

KINDS = (
    "one_round",
    "two_small",
    "two_large",
    "two_restricted",
    "three_restricted",
    "prior_l_rounds",
    "prior_delta1",
    "alweiss",
)

# Kinds whose formula depends on the round count.
_NEEDS_ROUNDS = ("prior_l_rounds", "prior_delta1")


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if not 1.0 <= delta < 2.0:
        raise DomainError(f"delta={delta!r} outside [1, 2)")
    return delta


def closed_form_bound(kind: str, delta: float, l: int | None = None) -> float:
    """Evaluate the named clique-exponent upper bound at budget exponent delta.

    All kinds share the domain 1 <= delta < 2. prior_l_rounds and
    prior_delta1 additionally need the round count l >= 1, and
    prior_delta1 is defined only at delta == 1.
    """
    if kind not in KINDS:
        raise DomainError(f"unknown bound kind {kind!r}; expected one of {KINDS}")
    delta = _check_delta(delta)
    if kind in _NEEDS_ROUNDS:
        if l is None or l != int(l) or int(l) < 1:
            raise DomainError(f"{kind} needs an integer round count l >= 1, got {l!r}")
        l = int(l)
    if kind == "one_round":
        return delta
    if kind == "two_small":
        # Arrangement of 4*delta/3 that lands exactly on 1.6 at the domain
        # split delta = 6/5, where it must agree with two_large in floats.
        return 1.0 + (4.0 * delta - 3.0) / 3.0
    if kind == "two_large":
        return 1.0 + math.sqrt((delta - 1.0) * (3.0 - delta))
    if kind in ("two_restricted", "three_restricted"):
        return 1.0 + delta / 2.0
    if kind == "prior_l_rounds":
        return 2.0 - delta * ((2.0 - delta) / 2.0) ** l
    if kind == "prior_delta1":
        if delta != 1.0:
            raise DomainError("prior_delta1 is defined only at delta == 1")
        return 2.0 ** (1.0 - 1.0 / (2.0**l - 1.0))
    return 1.0 + math.sqrt(1.0 - (2.0 - delta) ** 2 / 2.0)


@dataclass(frozen=True)
class BoundTerm:
    """One per-round term of the multi-round matching bound.

    value = numerator / denominator with
    numerator   = 2 - (4 - 2 max_{j<=i} delta_j) * m_i
    denominator = w_{i-1}
    """

    round_index: int
    numerator: float
    denominator: float
    value: float


def gen_lemma_terms(
    deltas: Sequence[float], ms: Sequence[float], ws: Sequence[float]
) -> list[BoundTerm]:
    """Per-round terms whose minimum is the multi-round matching bound.

    deltas, ms, ws must have equal length l. ws holds (w_0, ..., w_{l-1}):
    the denominator of the round-i term is w_{i-1}, and w_0 = 1 is required.
    """
    l = len(deltas)
    if not (len(ms) == len(ws) == l) or l == 0:
        raise DomainError(
            f"deltas, ms, ws need equal nonzero lengths, got {l}, {len(ms)}, {len(ws)}"
        )
    if ws[0] != 1.0:
        raise DomainError(f"w_0 must equal 1, got {ws[0]!r}")
    for i, w in enumerate(ws):
        if not 0.0 < w <= 1.0:
            raise DomainError(f"w_{i}={w!r} outside (0, 1]")
    for i, m in enumerate(ms):
        if not 0.0 <= m <= 0.5:
            raise DomainError(f"m_{i + 1}={m!r} outside [0, 1/2]")
    terms = []
    running_max = -math.inf
    for i in range(l):
        running_max = max(running_max, float(deltas[i]))
        num = 2.0 - (4.0 - 2.0 * running_max) * float(ms[i])
        den = float(ws[i])  # round i+1 divides by w_i, the fraction left before it
        terms.append(BoundTerm(i + 1, num, den, num / den))
    return terms


def gen_lemma_bound(
    deltas: Sequence[float], ms: Sequence[float], ws: Sequence[float]
) -> float:
    """min over rounds i of (2 - (4 - 2 max_{j<=i} delta_j) m_i) / w_{i-1}."""
    return min(t.value for t in gen_lemma_terms(deltas, ms, ws))


def two_round_curves(
    delta: float, m1: float, restricted: bool = False
) -> tuple[float, float]:
    """The pair of per-round clique-exponent curves at matching fraction m1.

    Unrestricted: alpha1 = 2 - (4 - 2 delta) m1,
                  alpha2 = delta / (1 - 4 m1 (1/2 - m1)).
    Restricted (first-round exponent delta1 = 3/2 - delta/4):
                  alpha1 = 2 - (4 - 2 delta1) m1,
                  alpha2 = (delta - (5 delta/2 - 3) m1) / (4 m1^2 - 2 m1 + 1).
    Both denominators are positive on the whole domain.
    """
    delta = _check_delta(delta)
    m1 = float(m1)
    if not 0.0 <= m1 <= 0.5:
        raise DomainError(f"m1={m1!r} outside [0, 1/2]")
    if restricted:
        delta1 = 1.5 - delta / 4.0
        alpha1 = 2.0 - (4.0 - 2.0 * delta1) * m1
        alpha2 = (delta - (2.5 * delta - 3.0) * m1) / (4.0 * m1 * m1 - 2.0 * m1 + 1.0)
    else:
        alpha1 = 2.0 - (4.0 - 2.0 * delta) * m1
        alpha2 = delta / (1.0 - 4.0 * m1 * (0.5 - m1))
    return alpha1, alpha2


def restricted_m_star(delta: float) -> float:
    """Right endpoint (1 - delta/2) / (1 + delta/2) of the restricted m1 range."""
    delta = _check_delta(delta)
    return (1.0 - delta / 2.0) / (1.0 + delta / 2.0)


def _check_crossing_delta(delta: float) -> float:
    delta = float(delta)
    if not 1.2 < delta < 2.0:
        raise DomainError(f"delta={delta!r} outside (6/5, 2)")
    return delta


def crossing_root(delta: float) -> float:
    """The m1 in (0, 1/2) where the two unrestricted curves cross.

    Closed form (1 - sqrt((delta-1)(3-delta))) / (4 - 2 delta); both curves
    evaluate to 1 + sqrt((delta-1)(3-delta)) there. Only defined for
    6/5 < delta < 2, where the crossing characterizes the optimum.
    """
    delta = _check_crossing_delta(delta)
    return (1.0 - math.sqrt((delta - 1.0) * (3.0 - delta))) / (4.0 - 2.0 * delta)


def crossing_cubic(delta: float, m1: float) -> float:
    """-(16-8d) m^3 + (16-4d) m^2 - (8-2d) m + 2 - d; zero at the crossing root."""
    delta = _check_crossing_delta(delta)
    m1 = float(m1)
    return (
        -(16.0 - 8.0 * delta) * m1**3
        + (16.0 - 4.0 * delta) * m1**2
        - (8.0 - 2.0 * delta) * m1
        + 2.0
        - delta
    )


@dataclass(frozen=True)
class RestrictedPeakReport:
    """Numeric audit that the restricted second-round curve peaks at m_star.

    identity_residual = |alpha2(m_star) - (1 + delta/2)|. deriv_root is the
    smaller root of the curve's derivative numerator; deriv_root_ok records
    that it lies at or beyond m_star, so the curve has no interior local
    maximum on (0, m_star). grid_max is the curve maximum over a uniform
    grid on [0, m_star].
    """

    delta: float
    m_star: float
    alpha_at_m_star: float
    identity_residual: float
    deriv_root: float
    deriv_root_ok: bool
    grid_points: int
    grid_max: float
    grid_ok: bool
    ok: bool


def restricted_peak_check(delta: float, grid_points: int = 10_000) -> RestrictedPeakReport:
    """Check the restricted curve attains its maximum 1 + delta/2 at m_star."""
    delta = _check_crossing_delta(delta)
    if grid_points < 2:
        raise DomainError(f"grid_points must be >= 2, got {grid_points}")
    m_star = restricted_m_star(delta)
    target = 1.0 + delta / 2.0
    alpha_star = two_round_curves(delta, m_star, restricted=True)[1]
    residual = abs(alpha_star - target)
    # Stable arrangement of (4d - sqrt(21d^2-36d+36)) / (2(5d-6)): the
    # numerator and denominator share the vanishing factor 5d-6 at d=6/5.
    disc = math.sqrt(21.0 * delta * delta - 36.0 * delta + 36.0)
    deriv_root = (6.0 - delta) / (2.0 * (4.0 * delta + disc))
    deriv_root_ok = deriv_root >= m_star - 1e-12
    grid_max = -math.inf
    for j in range(grid_points):
        m = m_star * j / (grid_points - 1)
        grid_max = max(grid_max, two_round_curves(delta, m, restricted=True)[1])
    grid_ok = grid_max <= target + 1e-10
    ok = residual < 1e-12 and deriv_root_ok and grid_ok
    return RestrictedPeakReport(
        delta=delta,
        m_star=m_star,
        alpha_at_m_star=alpha_star,
        identity_residual=residual,
        deriv_root=deriv_root,
        deriv_root_ok=deriv_root_ok,
        grid_points=grid_points,
        grid_max=grid_max,
        grid_ok=grid_ok,
        ok=ok,
    )


def bound_grid(
    kinds: Sequence[str],
    lo: float,
    hi: float,
    step: float,
    l: int = 3,
) -> list[tuple[float, str, float]]:
    """(delta, kind, alpha) rows over a uniform delta grid, kind-major.

    prior_delta1 is only defined at delta == 1, so it contributes rows only
    at grid points exactly equal to 1.0.
    """
    if step <= 0.0:
        raise DomainError(f"step must be positive, got {step!r}")
    if hi < lo:
        raise DomainError(f"empty grid: hi={hi!r} < lo={lo!r}")
    for kind in kinds:
        if kind not in KINDS:
            raise DomainError(f"unknown bound kind {kind!r}; expected one of {KINDS}")
    npts = int((hi - lo) / step + 1e-9) + 1
    # Snap accumulated grid points to 12 decimals so CSV output stays tidy.
    deltas = [round(lo + k * step, 12) for k in range(npts)]
    rows = []
    for kind in kinds:
        for d in deltas:
            if kind == "prior_delta1" and d != 1.0:
                continue
            rows.append((d, kind, closed_form_bound(kind, d, l=l)))
    return rows
