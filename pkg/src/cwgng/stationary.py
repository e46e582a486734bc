"""Stationary points of the conditioned cost, minimizer sets and branches.

The stationarity condition is k(m) = l(m) with l the conditioning line of
slope coth(2t) > 1. Since k - l -> +inf at m = -1 and -> -inf at m = +1,
the equation always has an odd number of roots; they are bracketed on a
uniform 4096-cell grid and polished by bisection.

A stationary point is a local minimum of the cost iff k'(m) < coth(2t)
(the line crosses k from below), a local maximum iff k'(m) > coth(2t), and
degenerate at tangency; degenerate points are excluded from minimizer sets
and handed to the bifurcation analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cost import ALPHA_CLAMP, ConditionedCost, Trajectory, cost, cost_values
from .errors import (DomainError, EmptyConeError, SolverInvariantViolation,
                     TangencyError, UnclassifiableError)
from .model import (ModelParams, k_fn, k_prime, k_zeros, l_coefficients,
                    m_infinity)
from .rootfind import GRID_N, acoth, bisect, grid_roots

LOCAL_MIN = "local_min"
LOCAL_MAX = "local_max"
DEGENERATE = "degenerate"

#: |k' - coth(2t)| below this is a tangency; the point is labeled degenerate
DEGEN_TOL = 1e-10

#: global minima are considered degenerate when costs agree within this
COST_EQ_TOL = 1e-9

#: a cost crossing must traverse +-CROSS_ATOL to count as a branch exchange;
#: symmetric branches at h = 0 differ only by float noise for large t
CROSS_ATOL = 1e-10

#: below this horizon the conditioning line is treated as vertical and the
#: unique stationary point is alpha itself
TINY_T = 1e-8


@dataclass(frozen=True)
class StationaryPoint:
    m: float
    cost: float
    kind: str


@dataclass(frozen=True)
class MinimizerSet:
    """Global minimizers of the conditioned cost at fixed (t, alpha)."""

    t: float
    alpha: float
    minima: tuple[tuple[float, float], ...]  # (m, cost), sorted by m
    degeneracy: int

    @property
    def m_hat(self) -> float:
        """Positive-most global minimizer (the representative used in plots)."""
        return self.minima[-1][0]


@dataclass(frozen=True)
class BranchPoint:
    t: float
    m_hat: float
    jump: bool


@dataclass(frozen=True)
class Jump:
    time: float
    m_before: float
    m_after: float


@dataclass(frozen=True)
class BranchTrack:
    points: tuple[BranchPoint, ...]
    jumps: tuple[Jump, ...]


@dataclass(frozen=True)
class OvershootProfile:
    """Monotonicity classification of t -> m_hat(t) at fixed alpha."""

    regime: str            # one of "1a", "1b", "1c", "1d"
    m_R: float | None      # apex magnetization (regimes 1a / 1d)
    t_R: float | None      # apex time
    m_inf: float           # t -> infinity limit of the branch


def _minima_and_costs(p: ModelParams, t: float, alpha: float,
                      n: int = GRID_N) -> tuple[np.ndarray, np.ndarray]:
    """Interior local minima of the cost with their values (fast path)."""
    if t < TINY_T:
        a = float(np.clip(alpha, -1.0 + ALPHA_CLAMP, 1.0 - ALPHA_CLAMP))
        return np.array([a]), np.array([0.0])
    coth, csch = l_coefficients(t)
    roots = grid_roots(lambda m: k_fn(m, p) - (m * coth - alpha * csch), -1.0, 1.0, n)
    if roots.size == 0:
        raise SolverInvariantViolation(
            f"k - l has no sign change on [-1,1] at t={t}, alpha={alpha}")
    kp = k_prime(roots, p)
    mins = roots[kp < coth - DEGEN_TOL]
    cc = ConditionedCost(p, t, alpha)
    return mins, cost_values(cc, mins)


def stationary_points(p: ModelParams, t: float, alpha: float,
                      n: int = GRID_N) -> list[StationaryPoint]:
    """All solutions of k(m) = l(m), classified and sorted by m."""
    if not t > 0.0:
        raise DomainError(f"stationary_points requires t > 0, got {t}")
    if t < TINY_T:
        cc = ConditionedCost(p, t, alpha)
        return [StationaryPoint(cc.alpha, cost(cc, cc.alpha), LOCAL_MIN)]
    coth, csch = l_coefficients(t)
    roots = grid_roots(lambda m: k_fn(m, p) - (m * coth - alpha * csch), -1.0, 1.0, n)
    if roots.size == 0:
        raise SolverInvariantViolation(
            f"k - l has no sign change on [-1,1] at t={t}, alpha={alpha}")
    cc = ConditionedCost(p, t, alpha)
    vals = cost_values(cc, roots)
    out = []
    for m, c in zip(roots, vals):
        kp = k_prime(float(m), p)
        if kp < coth - DEGEN_TOL:
            kind = LOCAL_MIN
        elif kp > coth + DEGEN_TOL:
            kind = LOCAL_MAX
        else:
            kind = DEGENERATE
        out.append(StationaryPoint(float(m), float(c), kind))
    return out


def global_minimizers(p: ModelParams, t: float, alpha: float,
                      eq_tol: float = COST_EQ_TOL) -> MinimizerSet:
    """All global minimizers, with the clamped endpoints as extra candidates."""
    mins, costs = _minima_and_costs(p, t, alpha)
    cc = ConditionedCost(p, t, alpha)
    cand_m = np.concatenate([mins, [-1.0 + ALPHA_CLAMP, 1.0 - ALPHA_CLAMP]])
    cand_c = np.concatenate([costs, cost_values(cc, np.array([-1.0, 1.0]))])
    ok = np.isfinite(cand_c)
    cand_m, cand_c = cand_m[ok], cand_c[ok]
    if cand_m.size == 0:
        raise SolverInvariantViolation(f"no finite cost candidates at t={t}, alpha={alpha}")
    best = float(np.min(cand_c))
    sel = cand_c <= best + eq_tol
    order = np.argsort(cand_m[sel])
    minima = tuple((float(m), float(c))
                   for m, c in zip(cand_m[sel][order], cand_c[sel][order]))
    return MinimizerSet(t=t, alpha=alpha, minima=minima, degeneracy=len(minima))


def _pick_branch(minima: tuple[tuple[float, float], ...], prev_m: float | None) -> float:
    """Continuation convention: nearest to the previous position, else the
    positive representative (ties at h = 0 resolve to the + branch)."""
    ms = np.array([m for m, _ in minima])
    if prev_m is None:
        return float(ms.max())
    return float(ms[np.argmin(np.abs(ms - prev_m))])


def refine_jump(p: ModelParams, alpha: float, t_lo: float, t_hi: float,
                m_lo: float, m_hi: float, ttol: float = 1e-10) -> Jump | None:
    """Bisection on the signed cost difference of two competing minima.

    Returns the time where the branch near m_lo and the branch near m_hi
    exchange global-minimum status inside (t_lo, t_hi), or None when no
    exchange happens (the flagged step was just fast, not a jump).
    """
    def diff(t, a_guess, b_guess):
        mins, costs = _minima_and_costs(p, t, alpha)
        ia = int(np.argmin(np.abs(mins - a_guess)))
        ib = int(np.argmin(np.abs(mins - b_guess)))
        if ia == ib:
            return None, a_guess, b_guess
        return float(costs[ia] - costs[ib]), float(mins[ia]), float(mins[ib])

    d_lo, a_cur, b_cur = diff(t_lo, m_lo, m_hi)
    d_hi, _, _ = diff(t_hi, m_lo, m_hi)
    if d_lo is None or d_hi is None or d_lo > -CROSS_ATOL or d_hi < CROSS_ATOL:
        return None
    lo, hi = t_lo, t_hi
    while hi - lo > ttol * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        d, a_new, b_new = diff(mid, a_cur, b_cur)
        if d is None or d >= 0.0:
            hi = mid
        else:
            lo, a_cur, b_cur = mid, a_new, b_new
    t_jump = 0.5 * (lo + hi)
    _, a_fin, b_fin = diff(t_jump, a_cur, b_cur)
    return Jump(time=t_jump, m_before=a_fin, m_after=b_fin)


def branch_track(p: ModelParams, alpha: float, t_grid) -> BranchTrack:
    """Global-minimizer branch over an increasing time grid.

    A grid step is flagged when the move exceeds 10x the local Lipschitz
    estimate (or the branch identity switches) and the jump is confirmed by
    a cost-equality bisection, which also provides the refined jump time.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1 or np.any(np.diff(t_grid) <= 0.0) \
            or t_grid[0] <= 0.0:
        raise DomainError("t_grid must be strictly increasing and positive")
    points: list[BranchPoint] = []
    jumps: list[Jump] = []
    prev_m = None
    prev_t = None
    lip = None
    for t in t_grid:
        ms = global_minimizers(p, float(t), alpha)
        m_hat = _pick_branch(ms.minima, prev_m)
        m_glob = min(ms.minima, key=lambda mc: mc[1])[0]
        jump_flag = False
        if prev_m is not None:
            dt = float(t) - prev_t
            dm = abs(m_hat - prev_m)
            est = lip if lip is not None else 0.05
            suspicious = dm > 10.0 * max(est, 1e-3) * dt
            switched = abs(m_glob - m_hat) > 1e-6
            if suspicious or switched:
                target = m_glob if switched else m_hat
                ref = refine_jump(p, alpha, prev_t, float(t), prev_m, target)
                if ref is not None:
                    jumps.append(ref)
                    jump_flag = True
                    m_hat = target
            if not jump_flag:
                lip = dm / dt
        points.append(BranchPoint(t=float(t), m_hat=m_hat, jump=jump_flag))
        prev_m, prev_t = m_hat, float(t)
    return BranchTrack(points=tuple(points), jumps=tuple(jumps))


# ---------------------------------------------------------------------------
# h = 0 constructions: t(m), C_M, m_1, m_*, Psi_c
# ---------------------------------------------------------------------------

def t_of_m(m: float, J: float) -> float:
    """Time at which m solves the stationarity equation for alpha = 0, h = 0.

    t(m) = acoth(a(m)/m) / 2, defined where a(m)/m > 1.
    """
    if m == 0.0:
        raise DomainError("t_of_m is undefined at m = 0 (take the limit instead)")
    p = ModelParams(J, 0.0)
    ratio = k_fn(m, p) / m
    if not ratio > 1.0:
        raise DomainError(f"m={m} is outside the stationary set (a(m)/m = {ratio} <= 1)")
    return 0.5 * acoth(ratio)


def cost_on_branch(m: float, J: float) -> float:
    """Cost of m at its own stationarity time: J m^2 / 2 + log(1 - m tanh(Jm)) / 2."""
    arg = 1.0 - m * math.tanh(J * m)
    if not arg > 0.0:
        raise DomainError(f"1 - m tanh(Jm) = {arg} <= 0 at m={m}, J={J}")
    return 0.5 * J * m * m + 0.5 * math.log(arg)


def m_one(J: float) -> float:
    """Solution of m a'(m) = a(m) on (0, 1): the stationarity-time minimum."""
    if not J > 1.5:
        raise DomainError(f"m_one requires J > 3/2, got {J}")
    p = ModelParams(J, 0.0)

    def g(m):
        return k_fn(m, p) - m * k_prime(m, p)

    roots = grid_roots(g, 1e-6, 1.0 - 1e-12)
    if roots.size == 0:
        raise SolverInvariantViolation(f"no root of m a' = a in (0,1) for J={J}")
    r = float(roots[0])
    if abs(g(r)) > 1e-11:
        raise SolverInvariantViolation(f"m_one residual {g(r):.2e} above 1e-11")
    return r


def m_star(J: float) -> float:
    """Zero of the branch cost on (m_1, 1): the jump magnetization at Psi_c."""
    if not J > 1.5:
        raise DomainError(f"m_star requires J > 3/2, got {J}")
    m1 = m_one(J)

    def g(m):
        return np.array([cost_on_branch(float(x), J) for x in np.atleast_1d(m)])

    roots = grid_roots(g, m1, 1.0 - 1e-9, n=GRID_N)
    if roots.size == 0:
        raise SolverInvariantViolation(f"branch cost has no zero in ({m1}, 1) for J={J}")
    r = float(roots[0])
    if abs(cost_on_branch(r, J)) > 1e-11:
        raise SolverInvariantViolation(f"m_star residual above 1e-11 at {r}")
    return r


def psi_c(J: float) -> float:
    """Critical symmetric time: acoth(2J-1)/2 for J <= 3/2, t(m_star) beyond."""
    if not J > 1.0:
        raise DomainError(f"psi_c requires J > 1, got {J}")
    if J <= 1.5:
        return 0.5 * acoth(2.0 * J - 1.0)
    return t_of_m(m_star(J), J)


# ---------------------------------------------------------------------------
# Overshoot analysis: Phi, t_F, t_L, eta_F, eta_L, apex
# ---------------------------------------------------------------------------

def big_phi(m, p: ModelParams, alpha: float):
    """Phi(m) = k(m)^2 - m^2 + alpha^2; the apex condition is Phi = 0."""
    k = k_fn(m, p)
    out = k * k - np.asarray(m, dtype=float) ** 2 + alpha * alpha
    return float(out) if np.ndim(out) == 0 else out


def _acoth_time(arg: float) -> float | None:
    """acoth(arg)/2 when that is a positive time, else None."""
    if arg > 1.0:
        return 0.5 * acoth(arg)
    return None


def t_first(m: float, p: ModelParams, alpha: float) -> float | None:
    """Earliest positive time at which m is stationary for both +-alpha.

    None when no positive solution exists. At m = +-alpha with m k(m) > 0
    the first time is 0 (the branch starts there).
    """
    k = k_fn(m, p)
    if m == alpha or m == -alpha:
        prod = m * k
        if prod > 0.0:
            return 0.0
        if prod < 0.0:
            return _acoth_time((k * k + m * m) / (2.0 * m * k))
        return None
    phi = big_phi(m, p, alpha)
    if phi < 0.0:
        if phi < -1e-13:
            return None
        phi = 0.0
    return _acoth_time((m * k + abs(alpha) * math.sqrt(phi)) / (m * m - alpha * alpha))


def t_last(m: float, p: ModelParams, alpha: float) -> float | None:
    """Latest positive time at which m is stationary for both +-alpha."""
    k = k_fn(m, p)
    if m == alpha or m == -alpha:
        prod = m * k
        if prod > 0.0:
            return _acoth_time((k * k + m * m) / (2.0 * m * k))
        if prod < 0.0:
            return 0.0
        return None
    phi = big_phi(m, p, alpha)
    if phi < 0.0:
        if phi < -1e-13:
            return None
        phi = 0.0
    return _acoth_time((m * k - abs(alpha) * math.sqrt(phi)) / (m * m - alpha * alpha))


def eta_first(m, p: ModelParams, alpha: float):
    """Sign function for t_first > 0: m k + (alpha^2 - m^2) + |alpha| sqrt(Phi)."""
    m = np.asarray(m, dtype=float)
    phi = np.maximum(big_phi(m, p, alpha), 0.0)
    out = m * k_fn(m, p) + (alpha * alpha - m * m) + abs(alpha) * np.sqrt(phi)
    return float(out) if out.ndim == 0 else out


def eta_last(m, p: ModelParams, alpha: float):
    """Sign function for t_last > 0: m k + (alpha^2 - m^2) - |alpha| sqrt(Phi)."""
    m = np.asarray(m, dtype=float)
    phi = np.maximum(big_phi(m, p, alpha), 0.0)
    out = m * k_fn(m, p) + (alpha * alpha - m * m) - abs(alpha) * np.sqrt(phi)
    return float(out) if out.ndim == 0 else out


def _phi_root(p: ModelParams, alpha: float, lo: float, hi: float,
              from_right: bool) -> float:
    """Sign-scanned root of Phi in (lo, hi); first from the chosen side.

    Bisection runs to the last representable bit and returns the bracket
    endpoint with Phi <= 0: there both apex time formulas drop the
    sqrt(Phi) term and agree exactly.
    """
    def f(x):
        return big_phi(x, p, alpha)

    xs = np.linspace(lo, hi, 2049)
    vals = f(xs)
    rng = range(len(xs) - 2, -1, -1) if from_right else range(len(xs) - 1)
    for i in rng:
        if vals[i] == 0.0:
            return float(xs[i])
        if vals[i] * vals[i + 1] < 0.0:
            a, b = float(xs[i]), float(xs[i + 1])
            fa, fb = float(vals[i]), float(vals[i + 1])
            for _ in range(80):
                mid = 0.5 * (a + b)
                if mid == a or mid == b:
                    break
                fm = f(mid)
                if fa * fm <= 0.0:
                    b, fb = mid, fm
                else:
                    a, fa = mid, fm
            return a if fa <= 0.0 else b
    raise SolverInvariantViolation(
        f"Phi has no root in ({lo}, {hi}) for J={p.J}, h={p.h}, alpha={alpha}")


def _mirror_regime(r: str) -> str:
    return {"1a": "1d", "1d": "1a", "1b": "1c", "1c": "1b"}[r]


def overshoot_profile(p: ModelParams, alpha: float) -> OvershootProfile:
    """Monotonicity regime of the minimizer branch, with apex when present.

    Classification by the signs of alpha and k(alpha): same signs give an
    overshoot (1a) / undershoot (1d) with apex m_R solving Phi = 0; opposite
    signs give monotone branches (1b decreasing, 1c increasing). The exact
    boundary k(alpha) = 0 is not classified.
    """
    if p.h < 0.0:
        q = overshoot_profile(p.mirrored(), -alpha)
        return OvershootProfile(regime=_mirror_regime(q.regime),
                                m_R=None if q.m_R is None else -q.m_R,
                                t_R=q.t_R, m_inf=-q.m_inf)
    kal = k_fn(alpha, p)
    if abs(kal) <= 1e-12:
        raise UnclassifiableError(
            f"k(alpha) = {kal:.2e} at alpha={alpha}: regime boundary, not classified")
    minf = m_infinity(p)
    branch_limit = -minf if (p.h == 0.0 and alpha < 0.0) else minf
    if alpha > 0.0 and kal > 0.0:
        zp = max(z for z in k_zeros(p) if z > 0.0)
        lo = max(alpha, minf)
        m_r = _phi_root(p, alpha, lo, zp, from_right=False)
        t_r = t_first(m_r, p, alpha)
        _check_apex(m_r, t_r, p, alpha)
        _check_windows(p, alpha, (alpha, m_r), (minf, m_r))
        return OvershootProfile("1a", m_r, t_r, branch_limit)
    if alpha > 0.0 and kal < 0.0:
        _check_windows(p, alpha, None, (minf, alpha))
        return OvershootProfile("1b", None, None, branch_limit)
    if alpha < 0.0 and kal > 0.0:
        _check_windows(p, alpha, None, (alpha, branch_limit))
        return OvershootProfile("1c", None, None, branch_limit)
    # alpha < 0, k(alpha) < 0: undershoot
    negs = [z for z in k_zeros(p) if z < alpha]
    if not negs:
        raise SolverInvariantViolation(
            f"no zero of k below alpha={alpha} despite k(alpha) < 0")
    zm = max(negs)
    m_r = _phi_root(p, alpha, zm, min(alpha, branch_limit), from_right=True)
    t_r = t_first(m_r, p, alpha)
    _check_apex(m_r, t_r, p, alpha)
    _check_windows(p, alpha, (m_r, alpha), (m_r, branch_limit))
    return OvershootProfile("1d", m_r, t_r, branch_limit)


def _check_apex(m_r: float, t_r: float | None, p: ModelParams, alpha: float):
    if abs(big_phi(m_r, p, alpha)) > 1e-9:
        raise SolverInvariantViolation(f"apex residual Phi({m_r}) above 1e-9")
    if t_r is None or not t_r > 0.0:
        raise SolverInvariantViolation(f"apex time not positive at m_R={m_r}")
    t_l = t_last(m_r, p, alpha)
    if t_l is None or abs(t_l - t_r) > 1e-8:
        raise SolverInvariantViolation("t_first and t_last disagree at the apex")


def _check_windows(p: ModelParams, alpha: float,
                   w_first: tuple[float, float] | None,
                   w_last: tuple[float, float] | None, samples: int = 17):
    """Positivity windows of t_first / t_last against the eta sign conditions."""
    for window, tfun, efun in ((w_first, t_first, eta_first),
                               (w_last, t_last, eta_last)):
        if window is None:
            continue
        lo, hi = min(window), max(window)
        if hi - lo < 1e-9:
            continue
        for m in np.linspace(lo, hi, samples + 2)[1:-1]:
            m = float(m)
            tv = tfun(m, p, alpha)
            eta = efun(m, p, alpha)
            want = eta > 0.0 if m * m > alpha * alpha else eta < 0.0
            have = tv is not None and tv > 0.0
            if want != have:
                raise SolverInvariantViolation(
                    f"positivity window mismatch at m={m}: eta predicts {want}, "
                    f"time gives {have}")


def branch_velocity(p: ModelParams, t: float, m_hat: float, alpha: float) -> float:
    """Implicit derivative dm_hat/dt along a stationary branch.

    Differentiating k(m) = m coth(2t) - alpha csch(2t) in t (note
    d coth(2t)/dt = -2 csch^2(2t)) gives

        dm/dt = 2 csch(2t) { alpha coth(2t) - m csch(2t) } / (k'(m) - coth(2t)),

    which vanishes exactly where Phi(m) = 0. (The sign of the numerator is
    the opposite of what a literal reading of the source derivation
    suggests; the corrected sign is the one that matches both finite
    differences and the monotone-regime tables.)
    """
    coth, csch = l_coefficients(t)
    den = k_prime(m_hat, p) - coth
    if abs(den) < 1e-10:
        raise TangencyError(
            f"k' - coth(2t) = {den:.2e} at m={m_hat}, t={t}: branch derivative "
            "undefined at tangency")
    return 2.0 * csch * (alpha * coth - m_hat * csch) / den


def forbidden_cone(J: float, t: float) -> tuple[Trajectory, Trajectory]:
    """Boundary trajectories +-phi of the forbidden cone at h = 0, alpha = 0.

    Defined for J > 1 and t >= Psi_c(J); the pair is built from the positive
    global minimizer m_hat(t). Cones are nested in t.
    """
    if not J > 1.0:
        raise DomainError(f"forbidden cone requires J > 1, got {J}")
    pc = psi_c(J)
    if t < pc - 1e-12:
        raise EmptyConeError(f"no cone below the critical time: t={t} < Psi_c={pc}")
    p = ModelParams(J, 0.0)
    ms = global_minimizers(p, t, 0.0)
    m_hat = ms.m_hat
    return (Trajectory(m0=m_hat, t=t, alpha=0.0),
            Trajectory(m0=-m_hat, t=t, alpha=0.0))
