"""Tangency analysis, bifurcation scenarios and the Gibbs/non-Gibbs timeline.

New stationary points appear when the conditioning line becomes tangent to
k; the tangency magnetizations at endpoint alpha are the solutions of
F(m) = alpha with

    F(m) = (m k'(m) - k(m)) / sqrt(k'(m)^2 - 1),      k'(m) > 1,

and the tangency time is acoth(k'(m))/2. A bifurcation happens when the
local minimum born at a tangency later undercuts the incumbent global
branch; the crossing time is located by bisection on the exact cost
difference, with local minima re-solved from scratch at every probe.

Scenario reports are cross-validated against an independent branch-tracking
pass; disagreement raises ContradictionError.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (ContradictionError, DomainError, SolverInvariantViolation,
                     TimelineValidationError, TrifurcationNotFound)
from .model import ModelParams, k_fn, k_prime, l_coefficients
from .rootfind import GRID_N, acoth, golden_max, grid_roots
from .stationary import (COST_EQ_TOL, CROSS_ATOL, Jump, _minima_and_costs,
                         branch_track, m_star, psi_c)

#: two crossings closer than this in time are reported as one trifurcation
TRI_TIME_TOL = 1e-7

#: pairwise cost gap below which three coexisting minima count as a trifurcation
TRI_COST_TOL = 1e-8

#: horizon up to which newborn branches are followed for a crossing
T_FOLLOW = 30.0

_KP_GUARD = 1e-12


@dataclass(frozen=True)
class TangencyPoint:
    m_tilde: float
    t_tilde: float


@dataclass(frozen=True)
class TangencyBounds:
    """Extremes of F over the two half-intervals, with their locations.

    U_B = max of F on [0, 1], L_B = min of F on [-1, 0]; a component is None
    when F's domain (k' > 1) does not meet that half-interval.
    """

    U_B: float | None
    L_B: float | None
    m_upper: float | None
    m_lower: float | None


@dataclass(frozen=True)
class BifurcationReport:
    scenario: str                     # "none" | "single" | "double" | "tri"
    t_B: float | None
    s_B: float | None
    t_T: float | None
    jumps: tuple[Jump, ...]


@dataclass(frozen=True)
class CrossoverTimes:
    psi_U: float | None = None
    psi_L: float | None = None
    psi_T: float | None = None
    psi_star: float | None = None
    U_B: float | None = None
    L_B: float | None = None
    M_T: float | None = None
    M_B: float | None = None
    h_star: float | None = None
    psi_c: float | None = None


@dataclass(frozen=True)
class TimelineSegment:
    t_lo: float
    t_hi: float
    status: str                       # "Gibbs" | "nonGibbs"
    bad_set_descriptor: str
    expected_bad_count: int


@dataclass(frozen=True)
class GibbsTimeline:
    segments: tuple[TimelineSegment, ...]


def tangency_F(m: float, p: ModelParams) -> float:
    """F(m) = (m k' - k)/sqrt(k'^2 - 1); requires k'(m) > 1."""
    kp = k_prime(m, p)
    if not kp > 1.0:
        raise DomainError(f"F undefined at m={m}: k'={kp} <= 1 (no tangency time)")
    return (m * kp - k_fn(m, p)) / math.sqrt(kp * kp - 1.0)


def _f_values(p: ModelParams, ms: np.ndarray) -> np.ndarray:
    kp = k_prime(ms, p)
    valid = kp > 1.0 + _KP_GUARD
    out = np.full(ms.shape, np.nan)
    kv = kp[valid]
    out[valid] = (ms[valid] * kv - k_fn(ms[valid], p)) / np.sqrt(kv * kv - 1.0)
    return out


def tangency_bounds(p: ModelParams, n: int = 2048,
                    xtol: float = 1e-11) -> TangencyBounds:
    """Grid scan of F over [0,1] and [-1,0] with golden-section polish."""
    def extremum(lo, hi, sign):
        xs = np.linspace(lo, hi, n + 1)
        vals = sign * _f_values(p, xs)
        if not np.any(np.isfinite(vals)):
            return None, None
        i = int(np.nanargmax(vals))
        a = xs[max(i - 1, 0)]
        b = xs[min(i + 1, n)]

        def f(m):
            kp = k_prime(m, p)
            if kp <= 1.0 + _KP_GUARD:
                return -np.inf
            return sign * (m * kp - k_fn(m, p)) / math.sqrt(kp * kp - 1.0)

        x, v = golden_max(f, float(a), float(b), xtol)
        if not np.isfinite(v):
            return float(xs[i]), sign * float(vals[i])
        return x, sign * v

    m_u, u_b = extremum(0.0, 1.0, +1.0)
    m_l, l_b = extremum(-1.0, 0.0, -1.0)
    return TangencyBounds(U_B=u_b, L_B=l_b, m_upper=m_u, m_lower=m_l)


def tangency_points(p: ModelParams, alpha: float) -> list[TangencyPoint]:
    """Solutions of F(m) = alpha over the k' > 1 domain, sorted by time."""
    ms = np.linspace(-1.0, 1.0, GRID_N + 1)
    d = _f_values(p, ms) - alpha
    out = []
    for i in range(GRID_N):
        if not (np.isfinite(d[i]) and np.isfinite(d[i + 1])):
            continue
        if d[i] == 0.0:
            out.append(float(ms[i]))
            continue
        if d[i] * d[i + 1] < 0.0:
            lo, hi, flo = float(ms[i]), float(ms[i + 1]), float(d[i])
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                fm = tangency_F(mid, p) - alpha
                if flo * fm <= 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            out.append(0.5 * (lo + hi))
    pts = []
    for m in out:
        t = 0.5 * acoth(k_prime(m, p))
        coth, csch = l_coefficients(t)
        if abs(k_fn(m, p) - (m * coth - alpha * csch)) > 1e-10:
            raise SolverInvariantViolation(
                f"tangency residual above 1e-10 at m={m}, t={t}")
        pts.append(TangencyPoint(m_tilde=m, t_tilde=t))
    pts.sort(key=lambda q: q.t_tilde)
    return pts


def _count_roots_near(p: ModelParams, t: float, alpha: float,
                      center: float, w: float) -> int:
    coth, csch = l_coefficients(t)
    lo, hi = max(-1.0, center - w), min(1.0, center + w)
    roots = grid_roots(lambda m: k_fn(m, p) - (m * coth - alpha * csch), lo, hi,
                       n=2048)
    return int(roots.size)


def _is_birth(p: ModelParams, alpha: float, tp: TangencyPoint,
              others: list[TangencyPoint]) -> bool | None:
    """True for a tangency creating a critical pair, False for one removing it.

    Compares the number of stationary points in an isolating window just
    before and after the tangency time; None when both probes stay ambiguous.
    """
    w = 0.04
    gap = np.inf
    for q in others:
        if q is not tp:
            w = min(w, abs(q.m_tilde - tp.m_tilde) / 2.0)
            gap = min(gap, abs(q.t_tilde - tp.t_tilde))
    base_dt = min(1e-3 * max(tp.t_tilde, 1e-2), 0.25 * gap)
    for dt in (base_dt, base_dt / 8.0, base_dt * 4.0):
        if dt <= 0.0 or dt >= tp.t_tilde:
            continue
        nb = _count_roots_near(p, tp.t_tilde - dt, alpha, tp.m_tilde, w)
        na = _count_roots_near(p, tp.t_tilde + dt, alpha, tp.m_tilde, w)
        if na - nb == 2:
            return True
        if na - nb == -2:
            return False
    return None


def _follow_and_cross(p: ModelParams, alpha: float, tp: TangencyPoint,
                      others: list[TangencyPoint], t_max: float) -> Jump | None:
    """Track the local minimum born at tp; return its takeover jump if any.

    d(t) = cost(branch) - best cost among the other minima. A crossing needs
    d < -CROSS_ATOL at some probe; symmetric cost gaps decaying to zero at
    h = 0 never qualify. The probe grid is refined around every later
    tangency time because the incumbent can die (min-max merge) shortly
    after the branch is born.
    """
    all_times = sorted(q.t_tilde for q in others)
    t0 = tp.t_tilde * (1.0 + 1e-3)
    gaps = [x - tp.t_tilde for x in all_times if x > tp.t_tilde]
    if gaps:
        t0 = min(t0, tp.t_tilde + 0.25 * min(gaps))
    # the newborn local minimum is the one without a pre-birth counterpart
    # (it may already have moved O(sqrt(dt)) away from the tangency point)
    pre_m, _ = _minima_and_costs(p, tp.t_tilde - (t0 - tp.t_tilde), alpha)
    mins, costs = _minima_and_costs(p, t0, alpha)
    if mins.size == 0:
        return None
    if pre_m.size == 0:
        dist = np.full(mins.shape, np.inf)
    else:
        dist = np.min(np.abs(mins[:, None] - pre_m[None, :]), axis=1)
    cand = int(np.argmax(dist))
    if dist[cand] < 1e-7 or abs(mins[cand] - tp.m_tilde) > 0.2:
        return None
    branch_m = float(mins[cand])

    def dval(t: float, guess: float):
        """(branch cost - best other cost, branch m, best other m, n minima).

        -inf when the branch is the only minimum (it has won by default:
        competitors can merge away exactly at the cost-equality boundary).
        None when the branch itself cannot be located.
        """
        mm, cc = _minima_and_costs(p, t, alpha)
        if mm.size == 0:
            return None, guess, None, 0
        j = int(np.argmin(np.abs(mm - guess)))
        if abs(mm[j] - guess) > 0.15:
            return None, guess, None, int(mm.size)
        rest_c = np.delete(cc, j)
        rest_m = np.delete(mm, j)
        fin = np.isfinite(rest_c)
        if mm.size == 1 or not fin.any():
            return -np.inf, float(mm[j]), None, int(mm.size)
        jo = int(np.argmin(np.where(fin, rest_c, np.inf)))
        return (float(cc[j] - rest_c[jo]), float(mm[j]), float(rest_m[jo]),
                int(mm.size))

    def dip_bottom(ta: float, tb: float, guess: float):
        """Golden-section minimum of d over [ta, tb] (hidden-takeover check).

        With three or more coexisting minima the branch can undercut the
        global pair inside one probe step and hand over to a third branch
        before the next probe; d then dips below zero between probes whose
        endpoint values are both positive.
        """
        inv = 0.6180339887498949
        a, b = ta, tb
        c = b - inv * (b - a)
        e = a + inv * (b - a)
        fc = dval(c, guess)[0]
        fe = dval(e, guess)[0]
        for _ in range(40):
            if b - a < 1e-6 * max(1.0, a):
                break
            if fc is None or fe is None:
                return None, None
            if fc < fe:
                b, e, fe = e, c, fc
                c = b - inv * (b - a)
                fc = dval(c, guess)[0]
            else:
                a, c, fc = c, e, fe
                e = a + inv * (b - a)
                fe = dval(e, guess)[0]
        mid = 0.5 * (a + b)
        return mid, dval(mid, guess)[0]

    # probe grid: geometric fill plus gap-relative flanks of every later
    # tangency time (competitors can appear or die there)
    knots = {t0, t_max}
    for x in all_times:
        if not t0 < x < t_max:
            continue
        gap = min((abs(x - y) for y in all_times if y != x), default=x)
        off = min(1e-6, 0.2 * gap) if gap > 0 else 1e-6
        knots.update((x - off, x + off))
    knots = sorted(knots)
    grid = []
    for a, b in zip(knots[:-1], knots[1:]):
        if b / a > 1.08:
            npts = int(math.log(b / a) / math.log(1.08)) + 2
            grid.extend(np.geomspace(a, b, npts)[:-1].tolist())
        else:
            grid.append(a)
    grid.append(t_max)

    d0, branch_m, other0, n0 = dval(t0, branch_m)
    if d0 is None or not d0 > CROSS_ATOL:
        return None  # newborn already at/below the incumbent: not a takeover
    prev_t, prev_m = t0, branch_m
    prev_other = other0
    prev_gap = d0
    prev_n = n0
    bracket = None
    queue = list(grid[1:])
    while queue:
        t = queue[0]
        d, m_new, m_other, n_min = dval(t, prev_m)
        if d is None:
            # either the branch died or it moved faster than the continuity
            # guard over this step: halve the step to re-anchor
            if t - prev_t < 1e-12 * max(1.0, t):
                return None  # died while still more expensive
            queue.insert(0, 0.5 * (prev_t + t))
            continue
        queue.pop(0)
        if d < -CROSS_ATOL:
            if prev_gap is None or prev_gap <= CROSS_ATOL:
                return None  # never seen strictly losing: no real exchange
            bracket = (prev_t, t, prev_m)
            break
        if (prev_gap > CROSS_ATOL and d > CROSS_ATOL
                and max(prev_n, n_min) >= 3):
            t_dip, d_dip = dip_bottom(prev_t, t, prev_m)
            if d_dip is not None and d_dip < -CROSS_ATOL:
                bracket = (prev_t, t_dip, prev_m)
                break
        prev_t, prev_m, prev_gap, prev_n = t, m_new, d, n_min
        if m_other is not None:
            prev_other = m_other
    if bracket is None:
        return None
    lo, hi, guess = bracket
    lo_gap = prev_gap
    lo_other = prev_other
    for _ in range(70):
        mid = 0.5 * (lo + hi)
        d, m_new, m_other, _ = dval(mid, guess)
        if d is None or d <= 0.0:
            hi = mid
        else:
            lo, guess, lo_gap = mid, m_new, d
            if m_other is not None:
                lo_other = m_other
    t_jump = 0.5 * (lo + hi)
    if lo_other is None or lo_gap is None or abs(lo_gap) > COST_EQ_TOL:
        raise SolverInvariantViolation(
            f"jump at t={t_jump} without cost equality (gap {lo_gap})")
    return Jump(time=t_jump, m_before=float(lo_other), m_after=float(guess))


def _mirror_report(rep: BifurcationReport) -> BifurcationReport:
    return BifurcationReport(
        scenario=rep.scenario, t_B=rep.t_B, s_B=rep.s_B, t_T=rep.t_T,
        jumps=tuple(Jump(j.time, -j.m_before, -j.m_after) for j in rep.jumps))


def _symmetric_report(p: ModelParams) -> BifurcationReport:
    """h = 0, alpha = 0: the fully symmetric case, resolved analytically.

    For J <= 1 nothing happens. For J > 1 the minimizer set switches from
    {0} to the symmetric pair at Psi_c; the jump is recorded through the
    positive representative (zero-length for J <= 3/2, where the pair opens
    continuously from 0).
    """
    if p.J <= 1.0:
        return BifurcationReport("none", None, None, None, ())
    tb = psi_c(p.J)
    m_after = m_star(p.J) if p.J > 1.5 else 0.0
    return BifurcationReport("single", tb, None, None,
                             (Jump(time=tb, m_before=0.0, m_after=m_after),))


def scenario(p: ModelParams, alpha: float, t_max: float = T_FOLLOW,
             cross_validate: bool = True) -> BifurcationReport:
    """Bifurcation classification at fixed endpoint alpha.

    Enumerates tangencies, follows every newborn local minimum forward in
    time, and collects the cost-equality takeovers. Negative-side tangencies
    that never undercut the running global branch are discarded.
    """
    if not abs(alpha) <= 1.0:
        raise DomainError(f"alpha must lie in [-1, 1], got {alpha}")
    if p.h < 0.0 or (p.h == 0.0 and alpha < 0.0):
        return _mirror_report(scenario(p.mirrored(), -alpha, t_max, cross_validate))
    if p.h == 0.0 and alpha == 0.0:
        return _symmetric_report(p)

    tps = tangency_points(p, alpha)
    jumps: list[Jump] = []
    for tp in tps:
        birth = _is_birth(p, alpha, tp, tps)
        if birth is not True:
            continue
        j = _follow_and_cross(p, alpha, tp, tps, t_max)
        if j is not None:
            jumps.append(j)
    jumps.sort(key=lambda j: j.time)

    if cross_validate:
        _validate_against_track(p, alpha, jumps,
                                [q.t_tilde for q in tps], t_max)

    if not jumps:
        return BifurcationReport("none", None, None, None, ())
    if len(jumps) == 1:
        j = jumps[0]
        if _is_triple(p, alpha, j.time):
            return BifurcationReport("tri", None, None, j.time, tuple(jumps))
        return BifurcationReport("single", j.time, None, None, tuple(jumps))
    if len(jumps) == 2:
        t1, t2 = jumps[0].time, jumps[1].time
        if t2 - t1 < TRI_TIME_TOL or _is_triple(p, alpha, 0.5 * (t1 + t2)):
            return BifurcationReport("tri", None, None, 0.5 * (t1 + t2), tuple(jumps))
        return BifurcationReport("double", t2, t1, None, tuple(jumps))
    raise SolverInvariantViolation(
        f"{len(jumps)} cost crossings at alpha={alpha}: outside the known scenarios")


def _is_triple(p: ModelParams, alpha: float, t: float) -> bool:
    mins, costs = _minima_and_costs(p, t, alpha)
    if mins.size < 3:
        return False
    c = np.sort(costs[np.isfinite(costs)])
    return c.size >= 3 and (c[2] - c[0]) < TRI_COST_TOL


def _validate_against_track(p: ModelParams, alpha: float, jumps: list[Jump],
                            tangency_times: list[float], t_max: float):
    """Independent confirmation of the jump list by global branch tracking."""
    t_start = 1e-2 if not tangency_times else max(min(tangency_times) / 3.0, 1e-4)
    grid = set(np.geomspace(t_start, t_max, 120).tolist())
    for j in jumps:
        grid.update((j.time * (1.0 - 1e-3), j.time * (1.0 + 1e-3)))
    for a, b in zip(sorted(j.time for j in jumps)[:-1],
                    sorted(j.time for j in jumps)[1:]):
        grid.add(0.5 * (a + b))
    track = branch_track(p, alpha, np.array(sorted(grid)))
    if len(track.jumps) != len(jumps):
        raise ContradictionError(
            f"scenario found {len(jumps)} jumps but branch tracking found "
            f"{len(track.jumps)} at alpha={alpha}")
    for ja, jb in zip(jumps, track.jumps):
        if abs(ja.time - jb.time) > 1e-8:
            raise ContradictionError(
                f"jump time mismatch: scenario {ja.time} vs track {jb.time}")


def t_bifurcation(p: ModelParams, alpha: float) -> float:
    """Final takeover time t_B(alpha); raises if alpha has no bifurcation."""
    rep = scenario(p, alpha, cross_validate=False)
    if not rep.jumps:
        raise DomainError(f"no bifurcation at alpha={alpha}")
    return rep.jumps[-1].time


# ---------------------------------------------------------------------------
# Trifurcation
# ---------------------------------------------------------------------------

def _three_branches(p: ModelParams, t: float, alpha: float):
    mins, costs = _minima_and_costs(p, t, alpha)
    if mins.size != 3 or not np.all(np.isfinite(costs)):
        return None
    order = np.argsort(mins)
    return mins[order], costs[order]


def _pair_equal_time(p: ModelParams, alpha: float, i: int, j: int,
                     t_lo: float, t_hi: float) -> float | None:
    """Time where cost(branch i) = cost(branch j) (branches ordered by m)."""
    def f(t):
        r = _three_branches(p, t, alpha)
        if r is None:
            return None
        return float(r[1][i] - r[1][j])

    flo, fhi = f(t_lo), f(t_hi)
    for _ in range(40):  # shrink endpoints into the three-branch window
        if flo is not None:
            break
        t_lo += (t_hi - t_lo) * 0.05
        flo = f(t_lo)
    for _ in range(40):
        if fhi is not None:
            break
        t_hi -= (t_hi - t_lo) * 0.05
        fhi = f(t_hi)
    if flo is None or fhi is None or flo * fhi > 0.0:
        return None
    lo, hi = t_lo, t_hi
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm is None:
            return None
        if flo * fm <= 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def trifurcation_magnetization(p: ModelParams) -> tuple[float, float]:
    """(M_T, t_T): the endpoint and time where three global minima coexist.

    Phase 1 brackets M_T by bisection on the double-vs-single predicate.
    Phase 2 refines it on the difference of the two pairwise cost-equality
    times, which crosses zero linearly in alpha (the global s_B/t_B gap
    only closes like a square root, so the predicate alone cannot reach the
    1e-8 cost tolerance).

    Raises TrifurcationNotFound when no double-bifurcation window exists.
    """
    if not p.J > 1.5:
        raise DomainError(f"trifurcation requires J > 3/2, got J={p.J}")
    if p.h == 0.0:
        raise DomainError("trifurcation requires h != 0")
    if p.h < 0.0:
        m_t, t_t = trifurcation_magnetization(p.mirrored())
        return -m_t, t_t

    tb = tangency_bounds(p)
    if tb.L_B is None or tb.U_B is None or tb.L_B >= 0.0:
        raise TrifurcationNotFound(f"no negative tangency range at J={p.J}, h={p.h}")
    lo_a = max(tb.L_B, -1.0) + 1e-9
    hi_a = min(0.0, tb.U_B) - 1e-9
    if hi_a <= lo_a:
        raise TrifurcationNotFound("empty candidate window for M_T")

    def n_jumps(a: float) -> int:
        return len(scenario(p, a, cross_validate=False).jumps)

    width = hi_a - lo_a
    probe_fracs = (2e-4, 1e-2, 0.1, 0.3, 0.6, 0.9)
    a_double = None
    for frac in probe_fracs:
        a = lo_a + frac * width
        if n_jumps(a) == 2:
            a_double = a
            break
    if a_double is None:
        raise TrifurcationNotFound(
            f"no double bifurcation found on ({lo_a:.4f}, {hi_a:.4f}): h >= h_*")
    a_single = hi_a
    if n_jumps(a_single) == 2:
        raise SolverInvariantViolation(
            f"double bifurcation persists at alpha={a_single}")

    lo, hi = a_double, a_single
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if n_jumps(mid) == 2:
            lo = mid
        else:
            hi = mid
    rep = scenario(p, lo, cross_validate=False)
    s_b, t_b = rep.jumps[0].time, rep.jumps[1].time
    span = 3.0 * (t_b - s_b) + 1e-6
    t_lo, t_hi = max(s_b - span, 0.25 * s_b), t_b + span

    def gap(a: float):
        """(cost(pos) - cost(neg)) at the incumbent=negative equality time.

        Positive on the double side (the negative branch takes over while
        the positive one is still more expensive), negative on the single
        side; zero exactly at the three-way equality. Crosses linearly in
        alpha, unlike t_B - s_B which closes like a square root.
        """
        t1 = _pair_equal_time(p, a, 1, 0, t_lo, t_hi)
        if t1 is None:
            return None
        r = _three_branches(p, t1, a)
        if r is None:
            return None
        return float(r[1][2] - r[1][0]), t1

    glo = gap(lo)
    ghi = gap(hi)
    if glo is None or ghi is None or glo[0] * ghi[0] > 0.0:
        raise SolverInvariantViolation("pairwise equality times failed to bracket M_T")
    flo = glo[0]
    for _ in range(70):
        mid = 0.5 * (lo + hi)
        g = gap(mid)
        if g is None:
            raise SolverInvariantViolation("three-branch window lost during refinement")
        if flo * g[0] <= 0.0:
            hi = mid
        else:
            lo, flo = mid, g[0]
    m_t = 0.5 * (lo + hi)
    g = gap(m_t)
    if g is None:
        raise SolverInvariantViolation("three-branch window lost at M_T")
    t_t = g[1]
    r = _three_branches(p, t_t, m_t)
    if r is None:
        raise SolverInvariantViolation("three minima absent at (M_T, t_T)")
    c = np.sort(r[1])
    if c[2] - c[0] > TRI_COST_TOL:
        raise SolverInvariantViolation(
            f"trifurcation cost spread {c[2] - c[0]:.2e} above {TRI_COST_TOL}")
    return m_t, t_t


def h_star(J: float, htol: float = 1e-6) -> float:
    """Threshold field below which a double-bifurcation window exists.

    Bisection in h on the predicate "trifurcation machinery finds a double
    window", bracket grown geometrically from h = 1e-3.
    """
    if not J > 1.5:
        raise DomainError(f"h_star requires J > 3/2, got {J}")

    def has_double(h: float) -> bool:
        try:
            trifurcation_window_probe(ModelParams(J, h))
            return True
        except TrifurcationNotFound:
            return False

    lo = 1e-3
    while not has_double(lo):
        lo /= 10.0
        if lo < 1e-9:
            raise SolverInvariantViolation(
                f"no double window even at h={lo * 10}: contradicts J > 3/2 theory")
    hi = max(2.0 * lo, 2e-3)
    while has_double(hi):
        lo = hi
        hi *= 2.0
        if hi > 16.0:
            raise SolverInvariantViolation("double window persists to h=16")
    while hi - lo > htol:
        mid = 0.5 * (lo + hi)
        if has_double(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def trifurcation_window_probe(p: ModelParams):
    """Cheap existence check of the double-bifurcation window (no refinement)."""
    if p.h < 0.0:
        return trifurcation_window_probe(p.mirrored())
    tb = tangency_bounds(p)
    if tb.L_B is None or tb.U_B is None or tb.L_B >= 0.0:
        raise TrifurcationNotFound("no negative tangency range")
    lo_a = max(tb.L_B, -1.0) + 1e-9
    hi_a = min(0.0, tb.U_B) - 1e-9
    if hi_a <= lo_a:
        raise TrifurcationNotFound("empty candidate window")
    width = hi_a - lo_a
    for frac in (2e-4, 1e-2, 0.1, 0.3, 0.6, 0.9):
        a = lo_a + frac * width
        if len(scenario(p, a, cross_validate=False).jumps) == 2:
            return a
    raise TrifurcationNotFound("no double bifurcation on the candidate window")


# ---------------------------------------------------------------------------
# Crossover times, bad sets, timeline
# ---------------------------------------------------------------------------

def _degenerate_tangency_time(p: ModelParams, m_extremum: float) -> float:
    return 0.5 * acoth(k_prime(m_extremum, p))


def crossover_times(p: ModelParams, validate: bool = True,
                    with_h_star: bool = False) -> CrossoverTimes:
    """All times at which the bad-magnetization structure changes.

    Psi_U and Psi_L are the degenerate tangency times at the extrema of F
    (the first/second bad window edges); Psi_T is the trifurcation time;
    Psi_star extrapolates the final bifurcation time to alpha = -1 with one
    Richardson step in epsilon. Segment labels are assigned from measured
    bad-set cardinalities, not from any assumed ordering.
    """
    if p.h < 0.0:
        ct = crossover_times(p.mirrored(), validate, with_h_star)
        return CrossoverTimes(
            psi_U=ct.psi_U, psi_L=ct.psi_L, psi_T=ct.psi_T, psi_star=ct.psi_star,
            U_B=None if ct.L_B is None else -ct.L_B,
            L_B=None if ct.U_B is None else -ct.U_B,
            M_T=None if ct.M_T is None else -ct.M_T,
            M_B=None if ct.M_B is None else -ct.M_B,
            h_star=ct.h_star, psi_c=ct.psi_c)

    if p.h == 0.0:
        if p.J <= 1.0:
            return CrossoverTimes()
        pc = psi_c(p.J)
        if p.J <= 1.5:
            ct = CrossoverTimes(psi_c=pc)
        else:
            tb = tangency_bounds(p)
            ct = CrossoverTimes(psi_c=pc, U_B=tb.U_B, L_B=tb.L_B,
                                psi_U=_degenerate_tangency_time(p, tb.m_upper))
        if validate:
            _validate_crossovers(p, ct)
        return ct

    tb = tangency_bounds(p)
    if tb.U_B is None or not np.isfinite(tb.U_B):
        return CrossoverTimes()  # no tangencies: Gibbs at all times
    psi_u = _degenerate_tangency_time(p, tb.m_upper)
    # final bad time, Richardson-extrapolated from alpha = -1 + eps
    eps = 1e-8
    t1 = t_bifurcation(p, -1.0 + eps)
    t2 = t_bifurcation(p, -1.0 + 2.0 * eps)
    psi_star = 2.0 * t1 - t2

    psi_t = psi_l = m_t = m_b = None
    if p.J > 1.5:
        try:
            m_t, psi_t = trifurcation_magnetization(p)
            psi_l = _degenerate_tangency_time(p, tb.m_lower)
            m_b = _solve_m_b(p, m_t, tb.U_B, psi_l)
        except TrifurcationNotFound:
            pass
    hs = h_star(p.J) if (with_h_star and p.J > 1.5) else None
    ct = CrossoverTimes(psi_U=psi_u, psi_L=psi_l, psi_T=psi_t, psi_star=psi_star,
                        U_B=tb.U_B, L_B=tb.L_B, M_T=m_t, M_B=m_b, h_star=hs)
    if validate:
        _validate_crossovers(p, ct)
    return ct


def _solve_m_b(p: ModelParams, m_t: float, u_b: float, psi_l: float) -> float:
    """alpha in (M_T, U_B) whose final bifurcation time equals Psi_L.

    The endpoints stay 1e-4-clear of M_T and U_B: at the exact edges the
    newborn critical pair is too degenerate to resolve on the scan grid.
    """
    margin = max(1e-4, 1e-3 * (u_b - m_t))
    lo, hi = m_t + margin, u_b - margin
    flo = t_bifurcation(p, lo) - psi_l
    fhi = t_bifurcation(p, hi) - psi_l
    if flo * fhi > 0.0:
        raise SolverInvariantViolation(
            f"t_B - Psi_L does not change sign on ({lo}, {hi})")
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        fm = t_bifurcation(p, mid) - psi_l
        if flo * fm <= 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def _validate_crossovers(p: ModelParams, ct: CrossoverTimes,
                         n_alpha: int = 512):
    """Probe bad-set cardinality on both sides of every reported time."""
    times = sorted(t for t in (ct.psi_U, ct.psi_L, ct.psi_T, ct.psi_star, ct.psi_c)
                   if t is not None)
    for t in times:
        delta = max(2e-3, 0.05 * t)
        lo_card = len(bad_set(p, max(t - delta, t / 2.0), n_alpha=n_alpha))
        hi_card = len(bad_set(p, t + delta, n_alpha=n_alpha))
        if lo_card == hi_card:
            raise TimelineValidationError(
                f"bad-set cardinality does not change across t={t} "
                f"({lo_card} on both sides)")


def bad_set(p: ModelParams, t: float, n_alpha: int = 2048,
            atol: float = 1e-10) -> list[float]:
    """All endpoints alpha whose cost has multiple global minimizers at time t.

    The endpoint axis is scanned on a uniform grid (resolution configurable
    via n_alpha); each jump of the global minimizer is refined by bisection
    on the signed cost difference of the two competing branches.
    """
    if not t > 0.0:
        raise DomainError(f"bad_set requires t > 0, got {t}")
    alphas = np.linspace(-1.0 + 1e-9, 1.0 - 1e-9, n_alpha + 1)
    bads: list[float] = []
    prev_a = prev_m = None
    for a in alphas:
        mins, costs = _minima_and_costs(p, t, float(a))
        if not np.any(np.isfinite(costs)):
            continue
        m_hat = float(mins[int(np.nanargmin(costs))])
        if prev_m is not None and abs(m_hat - prev_m) > 0.02:
            a_bad = _alpha_cross(p, t, prev_a, float(a), prev_m, m_hat, atol)
            if a_bad is not None:
                bads.append(a_bad)
        prev_a, prev_m = float(a), m_hat
    return sorted(bads)


def _alpha_cross(p: ModelParams, t: float, a_lo: float, a_hi: float,
                 m_lo: float, m_hi: float, atol: float) -> float | None:
    """Endpoint where the branches near m_lo / m_hi exchange global status."""
    def diff(a, lo_guess, hi_guess):
        mins, costs = _minima_and_costs(p, t, a)
        i = int(np.argmin(np.abs(mins - lo_guess)))
        j = int(np.argmin(np.abs(mins - hi_guess)))
        if i == j:
            return None, lo_guess, hi_guess
        return float(costs[j] - costs[i]), float(mins[i]), float(mins[j])

    d_lo, glo, ghi = diff(a_lo, m_lo, m_hi)
    d_hi, _, _ = diff(a_hi, m_lo, m_hi)
    if d_lo is None or d_hi is None or d_lo < 0.0 or d_hi > 0.0:
        return None
    lo, hi = a_lo, a_hi
    while hi - lo > atol:
        mid = 0.5 * (lo + hi)
        d, glo_new, ghi_new = diff(mid, glo, ghi)
        if d is None or d <= 0.0:
            hi = mid
        else:
            lo, glo, ghi = mid, glo_new, ghi_new
    return 0.5 * (lo + hi)


def gibbs_timeline(p: ModelParams, t_max: float, n_alpha: int = 512,
                   probes_per_segment: int = 3) -> GibbsTimeline:
    """Partition of (0, t_max] into Gibbs / non-Gibbs segments.

    Segment boundaries come from crossover_times; every segment is verified
    by sampling the bad set at interior times (mismatch raises
    TimelineValidationError). Segments are half-open (lo, hi].
    """
    if not t_max > 0.0:
        raise DomainError(f"t_max must be > 0, got {t_max}")
    ct = crossover_times(p, validate=False)
    segs: list[TimelineSegment] = []

    def add(lo, hi, count, descriptor):
        if lo < t_max and hi > lo:
            hi = min(hi, t_max)
            status = "Gibbs" if count == 0 else "nonGibbs"
            segs.append(TimelineSegment(lo, hi, status, descriptor, count))

    inf = float("inf")
    if p.h == 0.0:
        if ct.psi_c is None:
            add(0.0, inf, 0, "no bad magnetizations")
        elif ct.psi_U is None:
            add(0.0, ct.psi_c, 0, "no bad magnetizations")
            add(ct.psi_c, inf, 1, "zero magnetization is bad")
        else:
            add(0.0, ct.psi_U, 0, "no bad magnetizations")
            add(ct.psi_U, ct.psi_c, 2, "symmetric bad pair")
            add(ct.psi_c, inf, 1, "zero magnetization is bad")
    elif ct.psi_U is None:
        add(0.0, inf, 0, "no bad magnetizations")
    elif ct.psi_T is None:
        add(0.0, ct.psi_U, 0, "no bad magnetizations")
        add(ct.psi_U, ct.psi_star, 1, "one bad magnetization")
        add(ct.psi_star, inf, 0, "no bad magnetizations")
    else:
        add(0.0, ct.psi_U, 0, "no bad magnetizations")
        add(ct.psi_U, ct.psi_L, 1, "one bad magnetization")
        add(ct.psi_L, ct.psi_T, 2, "two bad magnetizations")
        add(ct.psi_T, ct.psi_star, 1, "one bad magnetization")
        add(ct.psi_star, inf, 0, "no bad magnetizations")

    for seg in segs:
        hi = seg.t_hi if math.isfinite(seg.t_hi) else max(t_max, 2.0 * seg.t_lo + 1.0)
        span = hi - seg.t_lo
        for q in np.linspace(0.25, 0.75, probes_per_segment):
            tp = seg.t_lo + q * span
            card = len(bad_set(p, tp, n_alpha=n_alpha))
            if card != seg.expected_bad_count:
                raise TimelineValidationError(
                    f"segment ({seg.t_lo:.6g}, {seg.t_hi:.6g}] expected "
                    f"{seg.expected_bad_count} bad magnetizations, probe at "
                    f"t={tp:.6g} found {card}")
    return GibbsTimeline(segments=tuple(segs))
