"""Independent validation machinery.

Two oracles, both deliberately ignorant of the closed-form cost:

  * a dynamic program over piecewise-linear magnetization paths on a uniform
    (time x level) grid, minimizing source entropy plus midpoint-rule action;
  * finite-N Monte Carlo of the actual spin system under independent flips,
    estimating the single-spin conditional kernel and the conditional law of
    the initial magnetization.

Randomness is counter-based (Philox): replica chunk c draws from the stream
keyed by the seed at counter offset c * 2^128, so results are reproducible
bit-for-bit and independent of how chunks are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, InsufficientAcceptanceError
from .model import ModelParams, lagrangian_values, static_rate

#: replicas per counter block; fixed so that results never depend on scheduling
CHUNK = 1 << 14

#: target slope quantum (in magnetization per unit time) for DP transitions
SLOPE_TARGET = 0.25


@dataclass(frozen=True)
class PathGrid:
    """Uniform discretization: time_steps intervals, mag_levels levels."""

    time_steps: int
    mag_levels: int
    t: float
    alpha: float

    def __post_init__(self):
        if self.time_steps < 2 or self.mag_levels < 3:
            raise DomainError("need time_steps >= 2 and mag_levels >= 3")
        if not self.t > 0.0:
            raise DomainError(f"total time must be > 0, got {self.t}")
        if not abs(self.alpha) <= 1.0:
            raise DomainError(f"alpha must lie in [-1, 1], got {self.alpha}")


@dataclass(frozen=True)
class PathDPResult:
    value: float            # DP optimum (midpoint-rule edge costs)
    start: float            # argmin initial magnetization
    path: tuple[float, ...]  # node magnetizations, one per block boundary
    refined_value: float    # found path re-integrated with fine quadrature
    block: int              # time steps spanned by one linear segment


def path_dp(p: ModelParams, grid: PathGrid,
            slope_target: float = SLOPE_TARGET) -> PathDPResult:
    """Brute-force minimization of source cost + action over grid paths.

    Paths are piecewise linear between level-grid nodes. Segments span
    `block` time steps, chosen so the representable slope quantum
    (level spacing / segment duration) is about `slope_target`; single-step
    segments would quantize slopes so coarsely that the DP pays a spurious
    chattering penalty. Edge cost is L(midpoint, slope) * duration.

    The returned `refined_value` re-integrates the winning path with
    16-point Gauss-Legendre per segment; being the exact action of an
    admissible path, it upper-bounds the true infimum.
    """
    levels = np.linspace(-1.0, 1.0, grid.mag_levels)
    dt = grid.t / grid.time_steps
    dm = levels[1] - levels[0]
    r = int(round(dm / (slope_target * dt)))
    r = max(1, min(grid.time_steps, r))
    while grid.time_steps % r != 0:
        r -= 1
    nblocks = grid.time_steps // r
    ds = r * dt

    mid = 0.5 * (levels[:, None] + levels[None, :])
    slope = (levels[None, :] - levels[:, None]) / ds
    edge = lagrangian_values(mid, slope) * ds

    value = static_rate(levels, p).astype(float)
    pred = np.empty((nblocks, grid.mag_levels), dtype=np.int32)
    cols = np.arange(grid.mag_levels)
    for b in range(nblocks):
        tot = value[:, None] + edge
        pred[b] = np.argmin(tot, axis=0)
        value = tot[pred[b], cols]
    i_end = int(np.argmin(np.abs(levels - grid.alpha)))
    best = float(value[i_end])

    idx = [i_end]
    for b in range(nblocks - 1, -1, -1):
        idx.append(int(pred[b][idx[-1]]))
    idx.reverse()
    path = tuple(float(levels[i]) for i in idx)

    nodes, weights = np.polynomial.legendre.leggauss(16)
    refined = float(static_rate(path[0], p))
    for a, b2 in zip(path[:-1], path[1:]):
        q = (b2 - a) / ds
        s_mid = 0.5 * ds * (nodes + 1.0)
        ms = a + q * s_mid
        refined += 0.5 * ds * float(np.sum(weights * lagrangian_values(ms, q)))
    return PathDPResult(value=best, start=path[0], path=path,
                        refined_value=refined, block=r)


# ---------------------------------------------------------------------------
# Finite-N Monte Carlo
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MCConfig:
    N: int
    replicas: int
    window: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if not (2 <= self.N <= 10 ** 6):
            raise DomainError(f"spin count N must be in [2, 1e6], got {self.N}")
        if self.replicas < 1:
            raise DomainError("need at least one replica")
        if self.window < 2.0 / self.N:
            raise DomainError(
                f"window {self.window} admits no magnetization level at N={self.N};"
                f" need >= {2.0 / self.N}")


@dataclass(frozen=True)
class KernelEstimate:
    gamma_plus_hat: float
    std_err: float
    accepted: int

    def __post_init__(self):
        if not (0.0 <= self.gamma_plus_hat <= 1.0 and self.std_err >= 0.0):
            raise DomainError("estimate outside [0,1] or negative std error")


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=seed & (2 ** 64 - 1), counter=chunk_index << 128))


def _level_distribution(cfg: MCConfig, p: ModelParams):
    """Exact finite-N magnetization law via log-binomial weights."""
    k = np.arange(cfg.N + 1)
    m = 2.0 * k / cfg.N - 1.0
    logw = (gammaln(cfg.N + 1) - gammaln(k + 1) - gammaln(cfg.N - k + 1)
            + cfg.N * (0.5 * p.J * m * m + p.h * m))
    logw -= logw.max()
    w = np.exp(logw)
    w /= w.sum()
    return m, np.cumsum(w)


def sample_magnetization(cfg: MCConfig, p: ModelParams,
                         rng: np.random.Generator, n: int) -> np.ndarray:
    """n draws of the up-spin count from the exact stationary law."""
    _, cdf = _level_distribution(cfg, p)
    return np.searchsorted(cdf, rng.random(n)).astype(np.int64)


def mc_sample_initial(cfg: MCConfig, p: ModelParams,
                      rng: np.random.Generator | None = None) -> np.ndarray:
    """One spin configuration drawn from the finite-N Gibbs measure.

    The magnetization level is drawn by exact inverse CDF over the N+1
    levels; the up spins are then placed uniformly at random.
    """
    if rng is None:
        rng = _chunk_rng(cfg.seed, 0)
    k = int(sample_magnetization(cfg, p, rng, 1)[0])
    sigma = np.full(cfg.N, -1, dtype=np.int8)
    sigma[rng.permutation(cfg.N)[:k]] = 1
    return sigma


def mc_evolve(sigma: np.ndarray, t: float,
              rng: np.random.Generator) -> np.ndarray:
    """Independent spin flips over time t; exact, no time discretization.

    Each spin keeps its value with probability (1 + exp(-2t))/2.
    """
    if t < 0.0:
        raise DomainError(f"evolution time must be >= 0, got {t}")
    pflip = 0.5 * (1.0 - math.exp(-2.0 * t))
    flips = rng.random(sigma.shape) < pflip
    return np.where(flips, -sigma, sigma).astype(np.int8)


def _conditioned_replicas(cfg: MCConfig, p: ModelParams, t: float, alpha: float):
    """Yield (sigma1_t, k0, accepted mask) per chunk of replicas.

    Replicas are generated as full configurations (uniform placement of the
    sampled number of up spins, then independent flips) and accepted when
    the magnetization of spins 2..N at time t is within the window of alpha.
    """
    pflip = 0.5 * (1.0 - math.exp(-2.0 * t))
    _, cdf = _level_distribution(cfg, p)
    done = 0
    chunk_index = 0
    while done < cfg.replicas:
        n = min(CHUNK, cfg.replicas - done)
        rng = _chunk_rng(cfg.seed, chunk_index)
        chunk_index += 1
        done += n
        ks = np.searchsorted(cdf, rng.random(n))
        # uniform configuration with ks[i] up spins: rank the iid uniforms
        u = rng.random((n, cfg.N))
        order = np.argsort(u, axis=1, kind="stable")
        ranks = np.empty_like(order)
        ranks[np.arange(n)[:, None], order] = np.arange(cfg.N)[None, :]
        sigma = np.where(ranks < ks[:, None], 1, -1).astype(np.int8)
        flips = rng.random((n, cfg.N)) < pflip
        sigma_t = np.where(flips, -sigma, sigma)
        m_rest = sigma_t[:, 1:].sum(axis=1) / (cfg.N - 1)
        acc = np.abs(m_rest - alpha) <= cfg.window
        yield sigma_t[:, 0], ks, acc


def mc_spec_kernel(cfg: MCConfig, p: ModelParams, t: float,
                   alpha: float) -> KernelEstimate:
    """Estimate of gamma(+1 | alpha) by conditioning on the final window.

    Raises InsufficientAcceptanceError when fewer than 100 replicas land in
    the window.
    """
    npos = nacc = 0
    for s1t, _, acc in _conditioned_replicas(cfg, p, t, alpha):
        nacc += int(acc.sum())
        npos += int((s1t[acc] == 1).sum())
    if nacc < 100:
        raise InsufficientAcceptanceError(nacc)
    ghat = npos / nacc
    return KernelEstimate(gamma_plus_hat=ghat,
                          std_err=math.sqrt(ghat * (1.0 - ghat) / nacc),
                          accepted=nacc)


def mc_conditional_initial(cfg: MCConfig, p: ModelParams, t: float,
                           alpha: float) -> tuple[np.ndarray, np.ndarray, int]:
    """Histogram of the initial magnetization among accepted replicas.

    Returns (levels, counts, accepted): counts over all N+1 attainable
    initial levels. The mass concentrates near the global minimizers of the
    conditioned cost.
    """
    counts = np.zeros(cfg.N + 1, dtype=np.int64)
    nacc = 0
    for _, ks, acc in _conditioned_replicas(cfg, p, t, alpha):
        counts += np.bincount(ks[acc], minlength=cfg.N + 1)
        nacc += int(acc.sum())
    if nacc < 100:
        raise InsufficientAcceptanceError(nacc)
    levels = 2.0 * np.arange(cfg.N + 1) / cfg.N - 1.0
    return levels, counts, nacc
