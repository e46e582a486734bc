"""Closed-form conditioned cost, optimal trajectories and the spin kernel.

The central object is the endpoint-conditioned cost C(m) of starting at
magnetization m and arriving at alpha after time t. Its closed form is
evaluated through quantities C1, C2, R with two algebraic rewrites that keep
it finite near m = alpha * exp(-2t) (where C1 vanishes) and for large t:

  * 1 - R = 4*C1*C2 / (1 + R), which cancels the C1 -> 0 indeterminacy in
    the middle log factor;
  * C1+C2 = m and C1*exp(-2t)+C2*exp(2t) = alpha, which guarantee that both
    outer log arguments stay positive strictly inside (-1, 1).

The module-level consistency check is cost == static_rate + action integral
along the optimal trajectory; the test suite enforces it at 1e-8.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, NegativeDiscriminantError, QuadratureError
from .model import ModelParams, lagrangian_values, static_rate

logger = logging.getLogger(__name__)

#: m and alpha are clamped into [-1 + ALPHA_CLAMP, 1 - ALPHA_CLAMP] inside cost
ALPHA_CLAMP = 1e-10

#: discriminant values in [-DISC_TOL, 0) are clamped to 0; below raises
DISC_TOL = 1e-12


@dataclass(frozen=True)
class ConditionedCost:
    """Cost functional C(m) for fixed parameters, horizon t and endpoint alpha."""

    p: ModelParams
    t: float
    alpha: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and self.t > 0.0):
            raise DomainError(f"horizon t must be finite and > 0, got {self.t}")
        if not abs(self.alpha) <= 1.0:
            raise DomainError(f"endpoint alpha must lie in [-1, 1], got {self.alpha}")
        object.__setattr__(self, "alpha",
                           float(np.clip(self.alpha, -1.0 + ALPHA_CLAMP, 1.0 - ALPHA_CLAMP)))

    def __call__(self, m: float) -> float:
        return cost(self, m)


@dataclass(frozen=True)
class CostAuxiliaries:
    """C1, C2 and R = sqrt(1 - 4 C1 C2) entering the closed form."""

    C1: float
    C2: float
    R: float


def aux(cc: ConditionedCost, m: float) -> CostAuxiliaries:
    """Auxiliary quantities at magnetization m.

    Raises NegativeDiscriminantError when 1 - 4*C1*C2 < -1e-12, which cannot
    happen for |m|, |alpha| <= 1 and flags inputs outside the formula's
    validity region.
    """
    u = math.exp(-2.0 * cc.t)
    den = -math.expm1(-4.0 * cc.t)  # 1 - exp(-4t)
    c1 = (m - cc.alpha * u) / den
    c2 = (cc.alpha * u - m * u * u) / den
    disc = 1.0 - 4.0 * c1 * c2
    if disc < 0.0:
        if disc < -DISC_TOL:
            logger.error("negative discriminant %.3e at t=%g alpha=%g m=%g",
                         disc, cc.t, cc.alpha, m)
            raise NegativeDiscriminantError(disc, cc.t, cc.alpha, m)
        disc = 0.0
    return CostAuxiliaries(c1, c2, math.sqrt(disc))


def _log_checked(x: float, name: str, cc: ConditionedCost, m: float) -> float:
    if not x > 0.0:
        raise DomainError(
            f"log of non-positive subterm {name}={x:.6e} in cost at "
            f"t={cc.t}, alpha={cc.alpha}, m={m}")
    return math.log(x)


# The middle log factor of the closed form,
#
#   [(1-R-2C1 a u)/(1+R-2C1 a u)] [(1+R-2C1 m)/(1-R-2C1 m)],
#
# is hopeless to evaluate directly (each small factor is a difference of
# O(1) terms). The identities C2 - a u = -u^2 C1 and C2 - m = -C1 give
#
#   (1-R-2C1 a u)(1+R-2C1 a u) = -4 C1^2 u^2 (1-a^2),
#   (1-R-2C1 m)(1+R-2C1 m)     = -4 C1^2 (1-m^2),
#
# so the factor equals  u^2 (1-a^2)/(1-m^2) [(1+R-2C1 m)/(1+R-2C1 a u)]^2
# exactly: strictly positive, no cancellation, valid at C1 = 0 too.


def cost(cc: ConditionedCost, m: float) -> float:
    """Conditioned cost C(m); m is clamped to |m| <= 1 - 1e-10."""
    if not abs(m) <= 1.0:
        raise DomainError(f"magnetization m must lie in [-1, 1], got {m}")
    m = float(np.clip(m, -1.0 + ALPHA_CLAMP, 1.0 - ALPHA_CLAMP))
    alpha, t = cc.alpha, cc.t
    a = aux(cc, m)
    c1, c2, r = a.C1, a.C2, a.R
    u = math.exp(-2.0 * t)
    den = -math.expm1(-4.0 * t)
    c1u = (m - alpha * u) * u / den          # C1 exp(-2t)
    c2eu = (alpha - m * u) / den             # C2 exp(+2t)
    num2 = 1.0 + r - 2.0 * c1 * m
    den1 = 1.0 + r - 2.0 * c1 * alpha * u
    one_m_a2 = (1.0 - alpha) * (1.0 + alpha)   # exact: 1+alpha is Sterbenz-safe
    one_m_m2 = (1.0 - m) * (1.0 + m)
    ratio2 = (num2 / den1) ** 2
    bracket = u * u * one_m_a2 / one_m_m2 * ratio2
    # (R - C1 u + C2/u)(R + C1 u - C2/u) = 1 - alpha^2 and the mirror identity
    # with C1 + C2 = m: when the direct difference cancels (endpoints near
    # +-1), divide the exact product by the O(1) conjugate instead
    term_alpha = r - c1u + c2eu
    conj_alpha = r + c1u - c2eu
    if abs(term_alpha) < abs(conj_alpha):
        term_alpha = one_m_a2 / conj_alpha
    term_m = r - c1 + c2
    conj_m = r + c1 - c2
    if abs(term_m) < abs(conj_m):
        term_m = one_m_m2 / conj_m
    val = static_rate(m, cc.p) + 0.25 * (
        4.0 * t
        + _log_checked(one_m_a2 / one_m_m2, "(1-alpha^2)/(1-m^2)", cc, m)
        + _log_checked(bracket, "bracket", cc, m)
        + 2.0 * (alpha * _log_checked(term_alpha / (1.0 - alpha), "(R - C1 e^-2t + C2 e^2t)/(1-alpha)", cc, m)
                 - m * _log_checked(term_m / (1.0 - m), "(R - C1 + C2)/(1-m)", cc, m)))
    if not math.isfinite(val):
        raise DomainError(f"cost not finite at t={t}, alpha={alpha}, m={m}")
    return val


def cost_values(cc: ConditionedCost, m) -> np.ndarray:
    """Vectorized cost; invalid points come back as NaN instead of raising."""
    m = np.clip(np.asarray(m, dtype=float), -1.0 + ALPHA_CLAMP, 1.0 - ALPHA_CLAMP)
    alpha, t = cc.alpha, cc.t
    u = math.exp(-2.0 * t)
    den = -math.expm1(-4.0 * t)
    c1 = (m - alpha * u) / den
    c2 = (alpha * u - m * u * u) / den
    r = np.sqrt(np.maximum(1.0 - 4.0 * c1 * c2, 0.0))
    num2 = 1.0 + r - 2.0 * c1 * m
    den1 = 1.0 + r - 2.0 * c1 * alpha * u
    one_m_a2 = (1.0 - alpha) * (1.0 + alpha)
    one_m_m2 = (1.0 - m) * (1.0 + m)
    with np.errstate(divide="ignore", invalid="ignore"):
        bracket = u * u * one_m_a2 / one_m_m2 * (num2 / den1) ** 2
        c1u = (m - alpha * u) * u / den
        c2eu = (alpha - m * u) / den
        term_alpha = r - c1u + c2eu
        conj_alpha = r + c1u - c2eu
        term_alpha = np.where(np.abs(term_alpha) < np.abs(conj_alpha),
                              one_m_a2 / conj_alpha, term_alpha) / (1.0 - alpha)
        term_m = r - c1 + c2
        conj_m = r + c1 - c2
        term_m = np.where(np.abs(term_m) < np.abs(conj_m),
                          one_m_m2 / conj_m, term_m) / (1.0 - m)
        out = static_rate(m, cc.p) + 0.25 * (
            4.0 * t + np.log(one_m_a2 / one_m_m2)
            + np.log(bracket) + 2.0 * (alpha * np.log(term_alpha) - m * np.log(term_m)))
    return out


@dataclass(frozen=True)
class Trajectory:
    """Constrained minimizing path from m0 to alpha over [0, t].

    phi(s)  = csch(2t) { m0 sinh(2(t-s)) + alpha sinh(2s) }
    phi'(s) = 2 csch(2t) { alpha cosh(2s) - m0 cosh(2(t-s)) }

    evaluated through decaying exponentials so both stay finite for any t.
    phi(0) = m0 and phi(t) = alpha hold exactly; |phi| <= max(|m0|, |alpha|).
    """

    m0: float
    t: float
    alpha: float

    def __post_init__(self):
        if not self.t > 0.0:
            raise DomainError(f"trajectory horizon must be > 0, got {self.t}")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        t = self.t
        den = -math.expm1(-4.0 * t)
        w0 = (np.exp(-2.0 * s) - np.exp(-2.0 * (2.0 * t - s))) / den
        w1 = (np.exp(-2.0 * (t - s)) - np.exp(-2.0 * (t + s))) / den
        out = self.m0 * w0 + self.alpha * w1
        return float(out) if out.ndim == 0 else out

    def velocity(self, s):
        s = np.asarray(s, dtype=float)
        t = self.t
        den = -math.expm1(-4.0 * t)
        ca = (np.exp(-2.0 * (t - s)) + np.exp(-2.0 * (t + s))) / den
        cm = (np.exp(-2.0 * s) + np.exp(-2.0 * (2.0 * t - s))) / den
        out = 2.0 * (self.alpha * ca - self.m0 * cm)
        return float(out) if out.ndim == 0 else out

    def check_admissible(self, samples: int = 101) -> bool:
        """Sampled check that the path never leaves [-1, 1]."""
        s = np.linspace(0.0, self.t, samples)
        return bool(np.all(np.abs(self(s)) <= 1.0 + 1e-12))


def optimal_trajectory(cc: ConditionedCost, m: float) -> Trajectory:
    """Minimizing path between fixed endpoints (m at 0, alpha at t)."""
    return Trajectory(m0=m, t=cc.t, alpha=cc.alpha)


def action_integral(traj: Trajectory, atol: float = 1e-10) -> float:
    """Integral of the Lagrangian along the trajectory, to absolute tolerance.

    Adaptive Gauss-Kronrod with an interval-halving fallback near the ends,
    where the path may graze +-1.
    """
    def integrand(s):
        return lagrangian_values(traj(s), traj.velocity(s))

    def integrate(lo, hi, depth):
        val, err, info, *rest = quad(integrand, lo, hi, epsabs=atol, limit=200,
                                     full_output=True)
        if not rest and err <= max(atol, 1e-11 * max(abs(val), 1.0)):
            return val, err
        if depth >= 10:
            return val, err
        # near s = 0 / s = t the path may graze +-1 (integrable log
        # singularity); split off a thin panel at the offending end
        if lo == 0.0 and abs(traj.m0) > 0.99:
            cut = lo + (hi - lo) * 1e-3
        elif hi == traj.t and abs(traj.alpha) > 0.99:
            cut = hi - (hi - lo) * 1e-3
        else:
            cut = 0.5 * (lo + hi)
        v1, e1 = integrate(lo, cut, depth + 1)
        v2, e2 = integrate(cut, hi, depth + 1)
        return v1 + v2, e1 + e2

    val, err = integrate(0.0, traj.t, 0)
    if err > 100.0 * atol:
        raise QuadratureError(err, atol)
    return val


def transition_kernel(t: float) -> np.ndarray:
    """Single-spin transition matrix over time t, indexed (+1, -1).

    p(stay) = exp(-t) cosh(t) = (1 + exp(-2t))/2; symmetric, rows sum to 1.
    """
    if t < 0.0:
        raise DomainError(f"transition kernel requires t >= 0, got {t}")
    stay = 0.5 * (1.0 + math.exp(-2.0 * t))
    flip = 0.5 * (1.0 - math.exp(-2.0 * t))
    return np.array([[stay, flip], [flip, stay]])


@dataclass(frozen=True)
class SpecKernel:
    """Limiting single-spin conditional probabilities given the endpoint."""

    gamma_plus: float
    gamma_minus: float

    def __post_init__(self):
        if not (0.0 <= self.gamma_plus <= 1.0 and
                abs(self.gamma_plus + self.gamma_minus - 1.0) < 1e-12):
            raise DomainError("kernel probabilities must be in [0,1] and sum to 1")


def spec_kernel(t: float, alpha: float, m0: float, p: ModelParams) -> SpecKernel:
    """Spin-1 conditional law given final magnetization alpha.

    m0 must be the initial magnetization of the (unique) minimizing path;
    the result depends on the path only through m0:

      gamma(z) = sum_x exp(x (J m0 + h)) p_t(x, z) / sum_{x,y} exp(x (J m0 + h)) p_t(x, y)

    gamma_plus is strictly increasing in m0.
    """
    field = p.J * m0 + p.h
    w = np.array([math.exp(field), math.exp(-field)])
    pt = transition_kernel(t)
    num = w @ pt  # [gamma(+1), gamma(-1)] before normalization
    tot = float(num.sum())
    return SpecKernel(gamma_plus=float(num[0]) / tot, gamma_minus=float(num[1]) / tot)
