"""Certified optimization pipeline: Lipschitz caps, elimination, refinement,
the path certificate, and the table solver."""

import math

import numpy as np
import pytest

from cliquequery.certopt import (
    L2,
    L3,
    V_POINT,
    FeasibleRegion,
    alpha_restricted,
    alpha_unrestricted,
    audit_eliminated,
    gamma_point,
    grad_alpha_restricted,
    interval_alpha_restricted,
    interval_grad_alpha_restricted,
    lipschitz_constants,
    phase1_eliminate,
    phase2_refine,
    point_eval,
    screen_survivors,
    solve_table1,
)
from cliquequery.errors import DomainError, PreconditionError
from cliquequery.interval import Box, Interval, VInterval


# ---------------------------------------------------------------------------
# Lipschitz constants

def test_lipschitz_partial_bounds_and_caps():
    rep = lipschitz_constants()
    caps2 = (16.0, 8.0, 8.0, 1.0)
    caps3 = (32.0, 24.0, 24.0, 2.0)
    for p, cap in zip(rep.partials_alpha2, caps2):
        assert p.lo == 0.0
        assert cap <= p.hi <= cap * (1 + 1e-12)  # lands on the cap, ulp-widened
    for p, cap in zip(rep.partials_alpha3, caps3):
        assert p.lo == 0.0
        assert cap <= p.hi <= cap * (1 + 1e-12)
    assert math.sqrt(385.0) <= rep.l2 <= 19.7
    assert math.sqrt(2180.0) <= rep.l3 <= 46.7
    assert rep.l2_cap == L2 and rep.l3_cap == L3
    assert rep.within_caps
    assert rep.elapsed < 1.0


def test_measured_slopes_stay_under_caps():
    # empirical pairwise slopes of both ratios over feasible pairs
    rng = np.random.default_rng(5)
    pts = _sample_feasible(rng, 10**5)
    qts = _sample_feasible(rng, 10**5)
    a2p, a3p = alpha_restricted(pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3])
    a2q, a3q = alpha_restricted(qts[:, 0], qts[:, 1], qts[:, 2], qts[:, 3])
    dist = np.linalg.norm(pts - qts, axis=1)
    keep = dist > 1e-9
    s2 = np.abs(a2p - a2q)[keep] / dist[keep]
    s3 = np.abs(a3p - a3q)[keep] / dist[keep]
    assert s2.max() <= L2
    assert s3.max() <= L3


# ---------------------------------------------------------------------------
# Exceptional path and vertex

def test_gamma_point_hits_path_value():
    region = FeasibleRegion("restricted3")
    for delta in np.linspace(1.0, 2.0, 100):
        x = gamma_point(float(delta))
        assert region.is_feasible(x)
        a2, a3 = alpha_restricted(*x)
        target = 1.0 + 0.5 * float(delta)
        assert abs(a2 - target) <= 1e-12
        assert abs(a3 - target) <= 1e-12


def test_v_point():
    assert V_POINT == (0.0, 0.0, 0.5, 1.0)
    a2, a3 = alpha_restricted(*V_POINT)
    assert abs(a2 - 1.5) <= 1e-12
    assert abs(a3 - 1.5) <= 1e-12


# ---------------------------------------------------------------------------
# Regions and point evaluation

def test_feasible_region_validation():
    r = FeasibleRegion("restricted3")
    assert r.bounds() == ((0.0, 0.5), (0.0, 0.5), (0.0, 0.5), (1.0, 2.0))
    u = FeasibleRegion("unrestricted3", delta=1.2)
    assert u.bounds() == ((0.0, 0.5),) * 4
    with pytest.raises(ValueError):
        FeasibleRegion("fourround")
    with pytest.raises(ValueError):
        FeasibleRegion("unrestricted3")  # needs delta
    with pytest.raises(DomainError):
        FeasibleRegion("unrestricted3", delta=2.5)
    with pytest.raises(ValueError):
        FeasibleRegion("restricted3", delta=1.2)
    with pytest.raises(ValueError):
        FeasibleRegion("restricted3", cap_m1p=False)


def test_feasible_region_violations():
    r = FeasibleRegion("restricted3")
    assert r.violations(gamma_point(1.3)) == []
    bad = r.violations((0.3, 0.3, 0.3, 1.5))
    assert any("1/2" in v for v in bad)
    bad = r.violations((0.0, 0.0, 0.0, 1.2))  # below the coverage threshold
    assert any("(2-delta)/(2+delta)" in v for v in bad)
    u = FeasibleRegion("unrestricted3", delta=1.2)
    bad = u.violations((0.0, 0.1, 0.0, 0.4))  # m1p above s2t/2 + d2t
    assert any("m1p" in v for v in bad)
    assert FeasibleRegion("unrestricted3", delta=1.2, cap_m1p=False).is_feasible(
        (0.0, 0.1, 0.0, 0.4))
    with pytest.raises(ValueError):
        r.violations((0.1, 0.2))


def test_point_eval():
    a2, a3 = point_eval("restricted3", gamma_point(1.4))
    assert abs(a2 - 1.7) <= 1e-12 and abs(a3 - 1.7) <= 1e-12
    # 3-point plus delta argument spells the same point
    g = gamma_point(1.4)
    assert point_eval("restricted3", g[:3], delta=1.4) == (a2, a3)
    with pytest.raises(ValueError):
        point_eval("restricted3", g[:3])  # missing delta
    with pytest.raises(ValueError):
        point_eval("restricted3", g, delta=1.5)  # disagreeing delta
    trip = point_eval("unrestricted3", (0.0, 0.0, 0.5, 0.5), delta=1.0)
    assert len(trip) == 3
    with pytest.raises(ValueError):
        point_eval("tworound", g)
    with pytest.raises(PreconditionError, match="infeasible"):
        point_eval("restricted3", (0.3, 0.3, 0.3, 1.5))
    with pytest.raises(PreconditionError, match="m1p"):
        point_eval("unrestricted3", (0.0, 0.1, 0.0, 0.4), delta=1.2)


# ---------------------------------------------------------------------------
# Interval soundness of the generic expression trees

def _sample_feasible(rng, n):
    out = []
    need = n
    while need > 0:
        cand = np.column_stack([
            rng.uniform(0.0, 0.5, size=2 * need),
            rng.uniform(0.0, 0.5, size=2 * need),
            rng.uniform(0.0, 0.5, size=2 * need),
            rng.uniform(1.0, 2.0, size=2 * need),
        ])
        a = (2.0 - cand[:, 3]) / (2.0 + cand[:, 3])
        ok = ((cand[:, 0] + cand[:, 1] + cand[:, 2] <= 0.5) &
              (2.0 * cand[:, 0] + cand[:, 1] + 2.0 * cand[:, 2] >= a))
        kept = cand[ok][:need]
        out.append(kept)
        need -= kept.shape[0]
    return np.concatenate(out)


def test_interval_alpha_soundness_sweep():
    # random small boxes anchored at feasible points: the vectorized interval
    # enclosure must contain the float value at random interior points
    rng = np.random.default_rng(11)
    n = 2 * 10**5
    base = _sample_feasible(rng, n)
    width = rng.uniform(0.0, 0.01, size=(n, 4))
    lo = base
    hi = np.minimum(base + width, np.array([0.5, 0.5, 0.5, 2.0]))
    coords = [VInterval(lo[:, k], hi[:, k]) for k in range(4)]
    ia2, ia3 = alpha_restricted(*coords)
    for _ in range(5):
        pts = lo + rng.random((n, 4)) * (hi - lo)
        a2, a3 = alpha_restricted(pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3])
        assert np.all((ia2.lo <= a2) & (a2 <= ia2.hi))
        assert np.all((ia3.lo <= a3) & (a3 <= ia3.hi))
    g2, g3 = grad_alpha_restricted(*coords)
    pts = lo + rng.random((n, 4)) * (hi - lo)
    p2, p3 = grad_alpha_restricted(pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3])
    for enclosure, exact in zip(g2 + g3, p2 + p3):
        assert np.all((enclosure.lo <= exact) & (exact <= enclosure.hi))


def test_interval_box_wrappers():
    x = gamma_point(1.4)
    box = Box.from_bounds([max(0.0, c - 0.01) for c in x], [c + 0.01 for c in x])
    ia2, ia3 = interval_alpha_restricted(box)
    a2, a3 = alpha_restricted(*x)
    assert isinstance(ia2, Interval)
    assert ia2.contains(a2) and ia3.contains(a3)
    ig2, ig3 = interval_grad_alpha_restricted(box)
    e2, e3 = grad_alpha_restricted(*x)
    for enc, val in zip(ig2 + ig3, e2 + e3):
        assert enc.contains(val)


# ---------------------------------------------------------------------------
# Phase 1 elimination

def test_phase1_coarse_structure_and_determinism():
    a = phase1_eliminate(eps_target=0.06, slack=0.1)
    b = phase1_eliminate(eps_target=0.06, slack=0.1)
    assert [(s.level, s.eps, s.boxes, s.surviving) for s in a.levels] == [
        (0, 0.25, 32, 28),
        (1, 0.125, 448, 256),
        (2, 0.0625, 4096, 2506),
        (3, 0.03125, 40096, 16278),
    ]
    assert a.n_survivors == 16278
    assert a.eps_final == 0.03125
    assert np.array_equal(a.survivors_lo, b.survivors_lo)
    assert np.array_equal(a.survivors_hi, b.survivors_hi)
    for s in a.levels:
        assert s.boxes == s.pruned_infeasible + s.eliminated + s.surviving


def test_phase1_large_slack_clears_everything():
    r = phase1_eliminate(eps_target=0.001, slack=1.0)
    assert r.n_survivors == 0
    # coarse boxes have huge Lipschitz radii, so elimination kicks in only
    # once the edges shrink; everything dies by level 4
    assert len(r.levels) == 5
    assert r.eps_final == 0.015625
    assert screen_survivors(r).shape == (0,)
    audit = audit_eliminated(r, n_points=20000)
    assert audit.clean
    assert audit.pruned_feasible_found == 0


def test_phase1_rejects_bad_arguments():
    with pytest.raises(DomainError):
        phase1_eliminate(eps_target=0.0, slack=0.1)
    with pytest.raises(DomainError):
        phase1_eliminate(eps_target=0.01, slack=-0.1)
    with pytest.raises(DomainError):
        phase1_eliminate(eps_target=0.01, slack=0.1, eps0=0.3)
    with pytest.raises(ValueError):
        phase1_eliminate(eps_target=0.01, slack=0.1, problem="unrestricted3")


# ---------------------------------------------------------------------------
# Phase 2 refinement

def _gamma_box(delta=1.4, r=0.05):
    g = gamma_point(delta)
    lo = tuple(max(0.0, c - r) for c in g[:3]) + (delta - r,)
    hi = tuple(c + r for c in g[:3]) + (delta + r,)
    return Box.from_bounds(lo, hi)


def test_phase2_dist_gamma_on_path():
    r = phase2_refine(_gamma_box(), "dist_gamma")
    assert r.converged
    assert r.classification == "on_gamma"
    assert r.dist_gamma <= 1e-6
    assert r.kkt_residual <= 1e-6
    assert r.max_violation <= 1e-9


def test_phase2_max_t_on_gamma_box():
    r = phase2_refine(_gamma_box(), "max_t")
    assert r.converged
    assert r.classification == "on_gamma"
    # the min-ratio maximum over the box sits on the path at its delta cap
    assert abs(r.value - 1.725) <= 1e-9
    assert abs(min(r.alpha2, r.alpha3) - r.value) <= 1e-7


def test_phase2_dist_v_at_vertex():
    box = Box.from_bounds((0.0, 0.0, 0.45, 1.0), (0.05, 0.05, 0.5, 1.05))
    r = phase2_refine(box, "dist_v")
    assert r.converged
    assert r.classification == "at_v"
    assert r.dist_v <= 1e-6
    assert r.kkt_residual <= 1e-6


def test_phase2_max_t_below_threshold_interior():
    box = Box.from_bounds((0.18, 0.18, 0.03, 1.48), (0.22, 0.22, 0.07, 1.52))
    r = phase2_refine(box, "max_t")
    assert r.converged
    assert r.classification == "below_threshold"
    assert r.value < 1.0 + 0.5 * r.x[3]


def test_phase2_rejects_bad_arguments():
    with pytest.raises(ValueError):
        phase2_refine(_gamma_box(), "min_t")
    with pytest.raises(ValueError):
        phase2_refine(_gamma_box(), "dist_gamma", problem="unrestricted3")
    with pytest.raises(ValueError):
        phase2_refine(_gamma_box(), "max_t", problem="tworound")
    with pytest.raises(ValueError):
        phase2_refine(_gamma_box(), "max_t", problem="unrestricted3")  # no delta


# ---------------------------------------------------------------------------
# Full certificate (session fixture; heavy)

def test_certificate_is_granted(certificate01):
    c = certificate01
    assert c.certified
    assert c.slack == 0.1
    assert c.gamma_residual <= 1e-12
    assert c.v_residual <= 1e-12
    assert c.audit.clean
    assert c.audit.eliminated_points == 100000
    assert c.audit.pruned_feasible_found == 0
    assert c.statement
    assert "slack 0.1" in c.statement


def test_certificate_phase1_shape(certificate01):
    p1 = certificate01.phase1
    assert certificate01.eps_target == 0.1 / L3
    assert p1.eps_final == 0.001953125
    assert len(p1.levels) == 8
    assert p1.n_survivors == 110951
    assert p1.levels[0].boxes == 32
    for s in p1.levels:
        assert s.boxes == s.pruned_infeasible + s.eliminated + s.surviving


def test_certificate_screening_settles_all_survivors(certificate01):
    c = certificate01
    assert c.screened == c.phase1.n_survivors
    assert c.phase2 == ()
    assert np.all(screen_survivors(c.phase1))


def test_certificate_survivors_hug_path_or_vertex(certificate01):
    p1 = certificate01.phase1
    cen = 0.5 * (p1.survivors_lo + p1.survivors_hi)
    a = (2.0 - cen[:, 3]) / (2.0 + cen[:, 3])
    d_gamma = np.sqrt(cen[:, 0] ** 2 + (cen[:, 1] - a) ** 2 + cen[:, 2] ** 2)
    d_v = np.sqrt(cen[:, 0] ** 2 + cen[:, 1] ** 2 +
                  (cen[:, 2] - 0.5) ** 2 + (cen[:, 3] - 1.0) ** 2)
    dmax = float(np.minimum(d_gamma, d_v).max())
    assert dmax <= 0.15


# ---------------------------------------------------------------------------
# Table solver

def test_table_delta1_is_golden_ratio():
    r = solve_table1(1.0, net_eps=0.1)
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    assert abs(r.alpha_bound - phi) <= 1e-9
    assert {"alpha1", "alpha2", "alpha3"} <= set(r.active_constraints)
    assert r.n_starts > 0
    assert 0 < r.n_converged <= r.n_starts
    assert "lower estimate" in r.caveat
    assert FeasibleRegion("unrestricted3", delta=1.0).is_feasible(r.best_point, atol=1e-7)
    assert r.best_alphas == pytest.approx(alpha_unrestricted(*r.best_point, 1.0), abs=0)


def test_table_delta15():
    r = solve_table1(1.5, net_eps=0.1)
    assert abs(r.alpha_bound - 1.9128709291754076) <= 1e-7


def test_table_cap_binds_at_delta12():
    capped = solve_table1(1.2, net_eps=0.1)
    relaxed = solve_table1(1.2, net_eps=0.1, cap_m1p=False)
    assert abs(capped.alpha_bound - 1.7571877794401287) <= 1e-7
    assert abs(relaxed.alpha_bound - 1.7613233743455383) <= 1e-7
    assert "m1p_cap" in capped.active_constraints
    assert relaxed.alpha_bound > capped.alpha_bound


def test_table_extra_start_floor():
    p = (0.0, (2.0 - 1.3) / (2.0 + 1.3), 0.0, 0.1)
    r = solve_table1(1.3, net_eps=0.25, extra_starts=[p])
    floor = min(alpha_unrestricted(*p, 1.3))
    assert r.alpha_bound >= floor - 1e-12


def test_table_rejects_bad_arguments():
    with pytest.raises(DomainError):
        solve_table1(0.9)
    with pytest.raises(DomainError):
        solve_table1(2.1)
    with pytest.raises(DomainError):
        solve_table1(1.2, net_eps=0.0)
