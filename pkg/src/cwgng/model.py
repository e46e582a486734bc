"""Scalar building blocks of the mean-field spin-flip problem.

Everything here is a pure function of its arguments. Functions accept
floats or numpy arrays and broadcast; scalar inputs give float outputs.

Conventions:
  * magnetizations live in the closed interval [-1, 1], with 0*log(0) = 0
    at the endpoints;
  * operations that divide by (1 - m^2) clamp to |m| <= 1 - 1e-12;
  * hyperbolic cotangent/cosecant of 2t are evaluated through exp(-4t) so
    they stay finite for large t and accurate for tiny t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SolverInvariantViolation
from .rootfind import GRID_N, bisect, grid_roots

#: clamp used where (1 - m^2) appears in a denominator or a log
M_CLAMP = 1e-12

#: residual tolerance for fixed points of tanh(J m + h) = m
FIXED_POINT_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Pair coupling J > 0 and external field h of the mean-field model."""

    J: float
    h: float

    def __post_init__(self):
        if not (math.isfinite(self.J) and self.J > 0.0):
            raise DomainError(f"coupling J must be finite and > 0, got {self.J}")
        if not math.isfinite(self.h):
            raise DomainError(f"field h must be finite, got {self.h}")

    def mirrored(self) -> "ModelParams":
        """Parameters of the spin-flipped problem (m, alpha, h) -> (-m, -alpha, -h)."""
        return ModelParams(self.J, -self.h)


def mean_field_potential(m, p: ModelParams):
    """Energy density -J m^2 / 2 - h m."""
    return -0.5 * p.J * m * m - p.h * m


def entropy(m):
    """Binary entropy term ((1+m)/2) log(1+m) + ((1-m)/2) log(1-m).

    Takes the 0*log(0) = 0 convention at m = +-1, so entropy(+-1) = log 2.
    Nonnegative, zero only at m = 0.
    """
    m = np.asarray(m, dtype=float)
    up = np.where(m > -1.0, (1.0 + m) * np.log1p(np.where(m > -1.0, m, 0.0)), 0.0)
    dn = np.where(m < 1.0, (1.0 - m) * np.log1p(np.where(m < 1.0, -m, 0.0)), 0.0)
    out = 0.5 * (up + dn)
    return float(out) if out.ndim == 0 else out


def static_rate(m, p: ModelParams):
    """Un-shifted static rate: mean_field_potential + entropy."""
    return mean_field_potential(m, p) + entropy(m)


def lagrangian(m: float, mdot: float) -> float:
    """Dynamic cost density of independent spin flips at (m, dm/ds).

    L(m, v) = -sqrt(4(1-m^2) + v^2)/2 + (v/2) log[(sqrt(4(1-m^2)+v^2)+v) / (2(1-m))] + 1.

    L >= 0 with equality exactly on the deterministic flow v = -2m. At
    m = +-1 the expression is defined only for velocities pointing inward,
    where the limiting value is returned.
    """
    if abs(m) > 1.0:
        raise DomainError(f"lagrangian requires |m| <= 1, got m={m}")
    if m == 1.0:
        if mdot >= 0.0:
            raise DomainError("lagrangian undefined at m=1 with mdot >= 0")
        # limit m->1^-: (S+v)/(2(1-m)) -> (1+m)/|v| -> 2/|v|
        return -0.5 * abs(mdot) + 0.5 * mdot * math.log(2.0 / abs(mdot)) + 1.0
    if m == -1.0:
        if mdot <= 0.0:
            raise DomainError("lagrangian undefined at m=-1 with mdot <= 0")
        return lagrangian(1.0, -mdot)
    s = math.sqrt(4.0 * (1.0 - m * m) + mdot * mdot)
    out = -0.5 * s + 1.0
    if mdot != 0.0:
        out += 0.5 * mdot * math.log((s + mdot) / (2.0 * (1.0 - m)))
    return out


def lagrangian_values(m, mdot):
    """Vectorized lagrangian with midpoints clamped to |m| <= 1 - 1e-12."""
    m = np.clip(np.asarray(m, dtype=float), -1.0 + M_CLAMP, 1.0 - M_CLAMP)
    v = np.asarray(mdot, dtype=float)
    s = np.sqrt(4.0 * (1.0 - m * m) + v * v)
    arg = (s + v) / (2.0 * (1.0 - m))
    term = np.where(v != 0.0, 0.5 * v * np.log(np.where(arg > 0.0, arg, 1.0)), 0.0)
    return -0.5 * s + 1.0 + term


def lagrangian_dv(m: float, mdot: float) -> float:
    """dL/dv = 0.5 log[(sqrt(4(1-m^2)+v^2)+v) / (2(1-m))]."""
    if not abs(m) < 1.0:
        raise DomainError(f"lagrangian_dv requires |m| < 1, got m={m}")
    s = math.sqrt(4.0 * (1.0 - m * m) + mdot * mdot)
    return 0.5 * math.log((s + mdot) / (2.0 * (1.0 - m)))


def a_fn(m, J: float):
    """a(m) = sinh(2Jm) - m cosh(2Jm); odd in m."""
    x = 2.0 * J * np.asarray(m, dtype=float)
    out = np.sinh(x) - m * np.cosh(x)
    return float(out) if np.ndim(out) == 0 else out


def b_fn(m, J: float):
    """b(m) = cosh(2Jm) - m sinh(2Jm); even in m."""
    x = 2.0 * J * np.asarray(m, dtype=float)
    out = np.cosh(x) - m * np.sinh(x)
    return float(out) if np.ndim(out) == 0 else out


def a_prime(m, J: float):
    """a'(m) = (2J-1) cosh(2Jm) - 2Jm sinh(2Jm)."""
    x = 2.0 * J * np.asarray(m, dtype=float)
    out = (2.0 * J - 1.0) * np.cosh(x) - 2.0 * J * m * np.sinh(x)
    return float(out) if np.ndim(out) == 0 else out


def b_prime(m, J: float):
    """b'(m) = (2J-1) sinh(2Jm) - 2Jm cosh(2Jm)."""
    x = 2.0 * J * np.asarray(m, dtype=float)
    out = (2.0 * J - 1.0) * np.sinh(x) - 2.0 * J * m * np.cosh(x)
    return float(out) if np.ndim(out) == 0 else out


def k_fn(m, p: ModelParams):
    """k(m) = a(m) cosh(2h) + b(m) sinh(2h) = sinh(2(Jm+h)) - m cosh(2(Jm+h))."""
    ch, sh = math.cosh(2.0 * p.h), math.sinh(2.0 * p.h)
    out = a_fn(m, p.J) * ch + b_fn(m, p.J) * sh
    return float(out) if np.ndim(out) == 0 else out


def k_prime(m, p: ModelParams):
    """Analytic m-derivative of k: a'(m) cosh(2h) + b'(m) sinh(2h)."""
    ch, sh = math.cosh(2.0 * p.h), math.sinh(2.0 * p.h)
    out = a_prime(m, p.J) * ch + b_prime(m, p.J) * sh
    return float(out) if np.ndim(out) == 0 else out


def k_double_prime(m, p: ModelParams):
    """Analytic second m-derivative of k."""
    J = p.J
    x = 2.0 * J * np.asarray(m, dtype=float)
    app = 4.0 * J * (J - 1.0) * np.sinh(x) - 4.0 * J * J * m * np.cosh(x)
    bpp = 4.0 * J * (J - 1.0) * np.cosh(x) - 4.0 * J * J * m * np.sinh(x)
    out = app * math.cosh(2.0 * p.h) + bpp * math.sinh(2.0 * p.h)
    return float(out) if np.ndim(out) == 0 else out


def l_coefficients(t: float) -> tuple[float, float]:
    """(coth(2t), csch(2t)) through exp(-4t); finite for all t > 0."""
    if not t > 0.0:
        raise DomainError(f"l requires t > 0, got t={t}")
    em4 = math.exp(-4.0 * t)
    den = -math.expm1(-4.0 * t)  # 1 - exp(-4t), accurate for tiny t
    return (1.0 + em4) / den, 2.0 * math.exp(-2.0 * t) / den


def l_fn(m, t: float, alpha: float):
    """Conditioning line m coth(2t) - alpha csch(2t); affine with slope > 1."""
    coth, csch = l_coefficients(t)
    out = np.asarray(m, dtype=float) * coth - alpha * csch
    return float(out) if np.ndim(out) == 0 else out


def m_infinity(p: ModelParams) -> float:
    """Largest solution of tanh(J m + h) = m (equilibrium magnetization).

    Found by a sign scan from the right end of [-1, 1] plus bisection; the
    result satisfies |tanh(J m + h) - m| <= 1e-12.
    """
    def g(m):
        return np.tanh(p.J * m + p.h) - m

    xs = np.linspace(-1.0, 1.0, GRID_N + 1)
    vals = g(xs)
    root = None
    for i in range(GRID_N, 0, -1):
        if vals[i] == 0.0:
            root = float(xs[i])
            break
        if vals[i - 1] == 0.0:
            root = float(xs[i - 1])
            break
        if vals[i - 1] * vals[i] < 0.0:
            root = bisect(lambda x: float(g(x)), float(xs[i - 1]), float(xs[i]),
                          float(vals[i - 1]))
            break
    if root is None:
        raise SolverInvariantViolation(
            f"no fixed point of tanh(Jm+h)=m found for J={p.J}, h={p.h}")
    if abs(math.tanh(p.J * root + p.h) - root) > FIXED_POINT_TOL:
        raise SolverInvariantViolation(
            f"fixed-point residual above {FIXED_POINT_TOL} at m={root}")
    return root


def a_over_b(m, J: float):
    """-a(m)/b(m); the b > 0 assumption is checked, not assumed."""
    b = b_fn(m, J)
    if np.min(np.abs(b)) < 1e-8:
        raise SolverInvariantViolation(
            f"b(m) vanishes near m={np.asarray(m).flat[np.argmin(np.abs(b))]} for J={J}")
    return -a_fn(m, J) / b


def k_zeros(p: ModelParams) -> list[float]:
    """All roots of k in (-1, 1), sorted.

    For h >= 0 there is a unique positive root z+ whenever one exists, plus
    a negative pair (z-, z-+) exactly when tanh(2h) < max of -a/b on [-1, 0].
    Negative h is handled by the m -> -m, h -> -h symmetry.
    """
    if p.h < 0.0:
        return sorted(-z for z in k_zeros(p.mirrored()))
    # guard the division in -a/b over the full interval before relying on it
    a_over_b(np.linspace(-1.0, 1.0, 513), p.J)
    roots = grid_roots(lambda m: k_fn(m, p), -1.0, 1.0)
    roots = [float(r) for r in roots if abs(r) < 1.0]
    bad = [r for r in roots if abs(k_fn(r, p)) > 1e-12]
    if bad:
        raise SolverInvariantViolation(f"k residual above 1e-12 at roots {bad}")
    return roots
