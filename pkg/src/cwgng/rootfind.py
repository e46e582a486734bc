"""Bracketing scalar solvers: grid sign-scan + bisection, golden-section search.

Bisection everywhere, by design: the functions we solve are smooth with few
roots, and bisection stays robust arbitrarily close to tangencies where
Newton-type methods stall.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

#: subintervals of [-1, 1] used by every magnetization-space sign scan
GRID_N = 4096

#: default bracket width at which bisection stops
XTOL = 1e-13

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def acoth(x: float) -> float:
    """Inverse hyperbolic cotangent, 0.5*log((x+1)/(x-1)); requires x > 1."""
    if not x > 1.0:
        raise DomainError(f"acoth requires x > 1, got {x}")
    return 0.5 * math.log((x + 1.0) / (x - 1.0))


def bisect(f: Callable[[float], float], lo: float, hi: float,
           flo: float | None = None, xtol: float = XTOL) -> float:
    """Root of f in [lo, hi] by bisection; f(lo) and f(hi) must differ in sign."""
    if flo is None:
        flo = f(lo)
    if flo == 0.0:
        return lo
    for _ in range(200):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def grid_roots(f_vec: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
               n: int = GRID_N, xtol: float = XTOL) -> np.ndarray:
    """All roots of a vectorized scalar function bracketed on a uniform grid.

    Exact zeros landing on grid nodes are kept as roots (the symmetric cases
    put roots exactly on nodes). Brackets are refined with a vectorized
    bisection loop.
    """
    xs = np.linspace(lo, hi, n + 1)
    g = np.asarray(f_vec(xs), dtype=float)
    exact = xs[g == 0.0]
    s = np.sign(g)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    if idx.size == 0:
        return np.sort(exact)
    a, b, fa = xs[idx].copy(), xs[idx + 1].copy(), g[idx].copy()
    iters = max(1, int(math.ceil(math.log2(max((hi - lo) / n, xtol) / xtol))) + 2)
    for _ in range(iters):
        mid = 0.5 * (a + b)
        fm = np.asarray(f_vec(mid), dtype=float)
        left = fa * fm <= 0.0
        b = np.where(left, mid, b)
        a = np.where(left, a, mid)
        fa = np.where(left, fa, fm)
    return np.sort(np.concatenate([exact, 0.5 * (a + b)]))


def golden_max(f: Callable[[float], float], lo: float, hi: float,
               xtol: float = 1e-11) -> tuple[float, float]:
    """Maximize a unimodal function on [lo, hi]; returns (argmax, max)."""
    a, b = lo, hi
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def refine_max_on_grid(f: Callable[[float], float], xs: Sequence[float],
                       vals: Sequence[float], xtol: float = 1e-11) -> tuple[float, float]:
    """Golden-section polish of a grid argmax, searching the two flanking cells."""
    vals = np.asarray(vals, dtype=float)
    i = int(np.nanargmax(vals))
    lo = xs[max(i - 1, 0)]
    hi = xs[min(i + 1, len(xs) - 1)]
    if lo == hi:
        return float(xs[i]), float(vals[i])
    return golden_max(f, float(lo), float(hi), xtol)
