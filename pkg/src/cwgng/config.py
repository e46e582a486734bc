"""Sweep configuration: INI-style key-value tree with environment overrides.

Grammar (configparser syntax, `key = value` under `[section]` headers):

    [model]
    J = 1.6              ; fixed value, or a grid under [grids]
    h = 0.0

    [grids]
    J = 1.6:3.0:8        ; start:stop:count (inclusive), or comma list
    t = 0.05:2.0:40
    alpha = -0.9,0.0,0.9

    [outputs]
    quantities = m_infinity, psi_c, m_star, tangency_bounds, crossovers, cost_curve

    [tolerances]
    cost_eq = 1e-9

    [parallelism]
    jobs = 1

    [seed]
    seed = 12345

Any key can be overridden by an environment variable CWGNG_<SECTION>_<KEY>
(upper-case), e.g. CWGNG_SEED_SEED=7 or CWGNG_PARALLELISM_JOBS=4.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

KNOWN_QUANTITIES = ("m_infinity", "psi_c", "m_star", "m_one",
                    "tangency_bounds", "crossovers", "cost_curve")

ENV_PREFIX = "CWGNG_"


@dataclass
class SweepConfig:
    J_grid: np.ndarray
    h_grid: np.ndarray
    alpha_grid: np.ndarray
    t_grid: np.ndarray
    quantities: tuple[str, ...]
    tolerances: dict = field(default_factory=dict)
    jobs: int = 1
    seed: int = 0
    m_samples: int = 401

    def validate(self):
        if any(g.size < 1 for g in (self.J_grid, self.h_grid)):
            raise DomainError("J and h grids must be nonempty")
        if np.any(self.J_grid <= 0.0):
            raise DomainError("all J values must be > 0")
        if np.any(np.abs(self.alpha_grid) > 1.0):
            raise DomainError("alpha values must lie in [-1, 1]")
        if np.any(self.t_grid <= 0.0):
            raise DomainError("t values must be > 0")
        if not self.quantities:
            raise DomainError("no output quantities requested")
        unknown = [q for q in self.quantities if q not in KNOWN_QUANTITIES]
        if unknown:
            raise DomainError(
                f"unknown quantities {unknown}; known: {KNOWN_QUANTITIES}")
        if self.jobs < 1:
            raise DomainError("jobs must be >= 1")


def _parse_grid(text: str, key: str) -> np.ndarray:
    text = text.strip()
    if not text:
        raise DomainError(f"empty grid for key '{key}'")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise DomainError(f"grid '{key}' must be start:stop:count, got {text!r}")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise DomainError(f"grid '{key}': {exc}") from exc
        if count < 1:
            raise DomainError(f"grid '{key}' count must be >= 1")
        return np.linspace(start, stop, count)
    try:
        return np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError as exc:
        raise DomainError(f"grid '{key}': {exc}") from exc


def _apply_env(cp: configparser.ConfigParser):
    for name, value in os.environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        rest = name[len(ENV_PREFIX):]
        if "_" not in rest:
            continue
        section, key = rest.split("_", 1)
        section, key = section.lower(), key.lower()
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, key, value)


def load_config(path: str) -> SweepConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = cp.read(path)
    if not read:
        raise DomainError(f"config file not found or unreadable: {path}")
    _apply_env(cp)

    def grid_for(key: str, fallback: str | None) -> np.ndarray:
        if cp.has_option("grids", key):
            return _parse_grid(cp.get("grids", key), key)
        if cp.has_option("model", key):
            return np.array([cp.getfloat("model", key)])
        if fallback is None:
            raise DomainError(f"missing grid or model value for '{key}'")
        return _parse_grid(fallback, key)

    try:
        quantities = tuple(
            q.strip() for q in cp.get("outputs", "quantities").split(",")
            if q.strip())
    except (configparser.NoSectionError, configparser.NoOptionError) as exc:
        raise DomainError(f"config: missing [outputs] quantities ({exc})") from exc

    tolerances = {}
    if cp.has_section("tolerances"):
        for key in cp.options("tolerances"):
            tolerances[key] = cp.getfloat("tolerances", key)

    cfg = SweepConfig(
        J_grid=grid_for("j", None),
        h_grid=grid_for("h", "0.0"),
        alpha_grid=grid_for("alpha", "0.0"),
        t_grid=grid_for("t", "1.0"),
        quantities=quantities,
        tolerances=tolerances,
        jobs=cp.getint("parallelism", "jobs", fallback=1),
        seed=cp.getint("seed", "seed", fallback=0),
        m_samples=cp.getint("outputs", "m_samples", fallback=401),
    )
    cfg.validate()
    return cfg
