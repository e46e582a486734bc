import math

import numpy as np
import pytest

from cwgng.bifurcation import (bad_set, crossover_times, gibbs_timeline,
                               h_star, scenario, t_bifurcation, tangency_F,
                               tangency_bounds, tangency_points,
                               trifurcation_magnetization)
from cwgng.errors import (DomainError, TimelineValidationError,
                          TrifurcationNotFound)
from cwgng.model import ModelParams, k_double_prime, k_fn, k_prime
from cwgng.rootfind import acoth
from cwgng.stationary import branch_track, m_star, psi_c


def test_tangency_F_domain_and_symmetry():
    p = ModelParams(2.5, 0.0)
    with pytest.raises(DomainError):
        tangency_F(0.9, p)  # k' < 1 out there
    for m in (0.1, 0.3, 0.55):
        assert tangency_F(-m, p) == pytest.approx(-tangency_F(m, p), abs=1e-13)


def test_tangency_F_critical_point_condition():
    # F'(m) = 0 iff k'' = 0 or m = k k'; here the maximum sits on the
    # k'' = 0 branch (the other root lies outside F's domain)
    from cwgng.rootfind import grid_roots
    p = ModelParams(2.9, 0.15)
    tb = tangency_bounds(p)
    roots = grid_roots(lambda m: k_double_prime(m, p), 0.3, 0.9)
    assert roots.size >= 1
    m0 = float(min(roots, key=lambda r: abs(r - tb.m_upper)))
    h = 1e-6
    fd = (tangency_F(m0 + h, p) - tangency_F(m0 - h, p)) / (2 * h)
    assert abs(fd) <= 1e-6
    # and the extremum found by the scan coincides with that root
    assert m0 == pytest.approx(tb.m_upper, abs=1e-7)


def test_tangency_bounds_regimes():
    tb = tangency_bounds(ModelParams(2.5, 0.0))
    assert tb.U_B > 0.0
    assert tb.L_B == pytest.approx(-tb.U_B, abs=1e-10)
    # for 1 < J <= 3/2 and h > 0 the maximum is negative for every field
    # strength (large fields do not change that below J = 2)
    assert tangency_bounds(ModelParams(1.42, 0.15)).U_B < 0.0
    assert tangency_bounds(ModelParams(1.42, 1.6)).U_B < 0.0
    assert tangency_bounds(ModelParams(2.9, 1.6)).U_B > 0.0
    tb = tangency_bounds(ModelParams(0.95, 0.01))
    assert tb.U_B is None and tb.L_B is None
    # (1.15, 0): the maximum of F on [0, 1] is 0, attained at the origin
    tb = tangency_bounds(ModelParams(1.15, 0.0))
    assert tb.U_B == pytest.approx(0.0, abs=1e-9)


def test_tangency_points_satisfy_system():
    from cwgng.model import l_coefficients
    p = ModelParams(2.9, 0.15)
    pts = tangency_points(p, -0.25)
    assert pts
    for q in pts:
        coth, csch = l_coefficients(q.t_tilde)
        assert k_prime(q.m_tilde, p) == pytest.approx(coth, abs=1e-9)
        assert k_fn(q.m_tilde, p) == pytest.approx(
            q.m_tilde * coth - (-0.25) * csch, abs=1e-10)


def test_scenario_none_cases():
    assert scenario(ModelParams(1.15, 0.0), 0.2).scenario == "none"
    assert scenario(ModelParams(0.8, 0.3), 0.5).scenario == "none"
    assert scenario(ModelParams(0.8, 0.0), 0.0).scenario == "none"
    # above U_B no bifurcation
    assert scenario(ModelParams(1.42, 0.15), -0.1).scenario == "none"


def test_scenario_symmetric_single():
    rep = scenario(ModelParams(2.5, 0.0), 0.0)
    assert rep.scenario == "single"
    assert rep.t_B == pytest.approx(psi_c(2.5), abs=1e-12)
    assert rep.jumps[0].m_before == 0.0
    assert rep.jumps[0].m_after == pytest.approx(m_star(2.5), abs=1e-12)
    rep13 = scenario(ModelParams(1.3, 0.0), 0.0)
    assert rep13.scenario == "single"
    assert rep13.t_B == pytest.approx(psi_c(1.3), abs=1e-15)


def test_scenario_single_and_double():
    p = ModelParams(2.9, 0.15)
    rep = scenario(p, 0.2)
    assert rep.scenario == "single" and rep.s_B is None
    rep = scenario(p, -0.25)
    assert rep.scenario == "double"
    assert rep.s_B < rep.t_B
    for j in rep.jumps:
        assert j.m_before != j.m_after
    # single below L_B
    rep = scenario(p, -0.5)
    assert rep.scenario == "single"


def test_scenario_mirror_symmetry():
    rep_p = scenario(ModelParams(2.9, 0.15), -0.25)
    rep_m = scenario(ModelParams(2.9, -0.15), 0.25)
    assert rep_m.scenario == rep_p.scenario
    for a, b in zip(rep_p.jumps, rep_m.jumps):
        assert b.time == a.time
        assert b.m_before == pytest.approx(-a.m_before, abs=1e-12)
        assert b.m_after == pytest.approx(-a.m_after, abs=1e-12)


def test_scenario_track_agreement(rng):
    # the cross-validation inside scenario() raises on disagreement; run it
    # over random parameter draws
    for _ in range(30):
        p = ModelParams(rng.uniform(0.3, 3.0), rng.uniform(-0.8, 0.8))
        alpha = rng.uniform(-0.9, 0.9)
        scenario(p, alpha, cross_validate=True)


def test_scenario_jump_cost_equality(rng):
    from cwgng.cost import ConditionedCost, cost
    from cwgng.model import l_fn
    p = ModelParams(2.9, 0.15)
    for alpha in (-0.25, -0.05, 0.2):
        rep = scenario(p, alpha)
        for j in rep.jumps:
            cc = ConditionedCost(p, j.time, alpha)
            assert cost(cc, j.m_before) == pytest.approx(cost(cc, j.m_after),
                                                         abs=1e-9)
            for m in (j.m_before, j.m_after):
                assert abs(k_fn(m, p) - l_fn(m, j.time, alpha)) <= 1e-11


def test_trifurcation():
    p = ModelParams(2.9, 0.15)
    m_t, t_t = trifurcation_magnetization(p)
    assert m_t < 0.0
    tb = tangency_bounds(p)
    assert tb.L_B < m_t < tb.U_B
    from cwgng.stationary import _minima_and_costs
    mins, costs = _minima_and_costs(p, t_t, m_t)
    assert mins.size == 3
    assert float(np.max(costs) - np.min(costs)) <= 1e-8
    with pytest.raises(TrifurcationNotFound):
        trifurcation_magnetization(ModelParams(2.9, 1.6))
    with pytest.raises(DomainError):
        trifurcation_magnetization(ModelParams(1.4, 0.15))


def test_trifurcation_mirror():
    m_t, t_t = trifurcation_magnetization(ModelParams(2.9, 0.15))
    m_tm, t_tm = trifurcation_magnetization(ModelParams(2.9, -0.15))
    assert m_tm == pytest.approx(-m_t, abs=1e-9)
    assert t_tm == pytest.approx(t_t, abs=1e-9)


def test_h_star_bracket():
    # the threshold field for J=2.9 lies between the two figure fields
    from cwgng.bifurcation import trifurcation_window_probe
    trifurcation_window_probe(ModelParams(2.9, 0.15))  # double window exists
    with pytest.raises(TrifurcationNotFound):
        trifurcation_window_probe(ModelParams(2.9, 1.6))
    hs = h_star(2.0, htol=1e-2)
    assert hs > 0.0
    trifurcation_window_probe(ModelParams(2.0, hs - 2e-2))
    with pytest.raises(TrifurcationNotFound):
        trifurcation_window_probe(ModelParams(2.0, hs + 2e-2))


def test_crossover_times_symmetric():
    ct = crossover_times(ModelParams(1.3, 0.0))
    assert ct.psi_c == pytest.approx(0.5 * acoth(1.6), abs=1e-12)
    assert ct.psi_U is None and ct.psi_star is None and ct.psi_T is None
    ct = crossover_times(ModelParams(0.8, 0.3), validate=False)
    assert all(getattr(ct, f) is None for f in
               ("psi_U", "psi_L", "psi_T", "psi_star", "psi_c"))
    ct25 = crossover_times(ModelParams(2.5, 0.0), validate=False)
    assert ct25.psi_U is not None and ct25.psi_U < ct25.psi_c
    assert ct25.U_B > 0.0 and ct25.L_B == pytest.approx(-ct25.U_B, abs=1e-9)


def test_crossover_times_full_scenario():
    ct = crossover_times(ModelParams(2.9, 0.15), validate=False)
    times = [ct.psi_U, ct.psi_L, ct.psi_T, ct.psi_star]
    assert all(t is not None and t > 0.0 for t in times)
    assert ct.psi_U < min(ct.psi_L, ct.psi_T)
    assert max(ct.psi_L, ct.psi_T) < ct.psi_star
    assert ct.psi_L < ct.psi_T  # measured ordering
    assert ct.U_B > ct.L_B
    assert ct.L_B < ct.M_T < 0.0
    assert ct.M_T < ct.M_B < ct.U_B
    # M_B maps to Psi_L through the final bifurcation time
    assert t_bifurcation(ModelParams(2.9, 0.15), ct.M_B) == pytest.approx(
        ct.psi_L, abs=1e-6)


def test_crossover_validation_probes():
    # cardinality changes across psi_c for the symmetric case
    crossover_times(ModelParams(1.3, 0.0), validate=True)


def test_bad_set_structure():
    p13 = ModelParams(1.3, 0.0)
    pc = psi_c(1.3)
    assert bad_set(p13, 0.5 * pc) == []
    bads = bad_set(p13, 2.0 * pc)
    assert len(bads) == 1 and abs(bads[0]) <= 1e-9
    p25 = ModelParams(2.5, 0.0)
    ct = crossover_times(p25, validate=False)
    t_mid = 0.5 * (ct.psi_U + ct.psi_c)
    pair = bad_set(p25, t_mid)
    assert len(pair) == 2
    assert pair[0] == pytest.approx(-pair[1], abs=1e-9)
    assert -ct.U_B < pair[0] < pair[1] < ct.U_B
    late = bad_set(p25, ct.psi_c * 1.4)
    assert len(late) == 1 and abs(late[0]) <= 1e-9


def test_bad_set_empty_for_weak_coupling():
    for J in (0.5, 0.9, 1.0):
        p = ModelParams(J, 0.0)
        for t in (0.1, 0.7, 2.0, 5.0):
            assert bad_set(p, t) == []


def test_bad_set_symmetric_in_alpha():
    p = ModelParams(2.5, 0.0)
    ct = crossover_times(p, validate=False)
    bads = bad_set(p, 0.6 * ct.psi_U + 0.4 * ct.psi_c)
    assert bads == pytest.approx([-b for b in reversed(bads)], abs=1e-9)


def test_first_bad_time_is_psi_U():
    p = ModelParams(2.5, 0.0)
    ct = crossover_times(p, validate=False)
    for t in (0.3 * ct.psi_U, 0.7 * ct.psi_U, ct.psi_U - 1e-3):
        assert bad_set(p, t, n_alpha=512) == []
    # just above the first bad time the two branches are barely separated;
    # the default scan resolution is needed to see the thin jump
    assert bad_set(p, ct.psi_U + 2e-3)


def test_gibbs_timeline_recovery():
    tl = gibbs_timeline(ModelParams(1.42, 0.15), 10.0)
    statuses = [s.status for s in tl.segments]
    assert statuses == ["Gibbs", "nonGibbs", "Gibbs"]
    assert tl.segments[-1].t_hi == 10.0


def test_gibbs_timeline_symmetric_persistent():
    tl = gibbs_timeline(ModelParams(1.3, 0.0), 3.0)
    statuses = [s.status for s in tl.segments]
    assert statuses == ["Gibbs", "nonGibbs"]
    assert tl.segments[1].t_lo == pytest.approx(psi_c(1.3), abs=1e-12)


def test_gibbs_timeline_trivial():
    tl = gibbs_timeline(ModelParams(0.5, 0.0), 5.0)
    assert len(tl.segments) == 1
    assert tl.segments[0].status == "Gibbs"


def test_t_b_monotone_short_grid():
    # decreasing final bifurcation time on a small alpha grid
    p = ModelParams(2.9, 0.15)
    ct = crossover_times(p, validate=False)
    grid = np.linspace(-0.9, ct.U_B - 5e-3, 6)
    tbs = [t_bifurcation(p, float(a)) for a in grid]
    assert all(b < a for a, b in zip(tbs, tbs[1:]))
