"""Command-line surface.

Curves are emitted as CSV (single header row, floats printed with 17
significant digits so they round-trip); reports as JSON envelopes with
schema_version "1" (see schemas/report-v1.schema.json). Exit codes:
0 success, 2 input/domain error, 3 internal invariant violation, 4 oracle
acceptance failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bifurcation import (bad_set, crossover_times, gibbs_timeline, scenario)
from .config import SweepConfig, load_config
from .cost import ConditionedCost, cost, spec_kernel
from .errors import CwgngError, DomainError, InsufficientAcceptanceError
from .model import ModelParams, m_infinity
from .oracle import (MCConfig, PathGrid, mc_conditional_initial,
                     mc_spec_kernel, path_dp)
from .stationary import (Trajectory, branch_track, global_minimizers, m_one,
                         m_star, psi_c)
from .bifurcation import tangency_bounds

SCHEMA_VERSION = "1"


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _write_csv(out, header: list[str], rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    _write_text(out, buf.getvalue())


def _write_text(out, text: str):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _jsonify(x):
    if isinstance(x, float):
        return x if math.isfinite(x) else "inf" if x > 0 else "-inf"
    if isinstance(x, (np.floating, np.integer)):
        return _jsonify(float(x))
    if isinstance(x, dict):
        return {k: _jsonify(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonify(v) for v in x]
    return x


def _write_report(out, kind: str, inputs: dict, result: dict,
                  warnings: list[str] | None = None):
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "inputs": _jsonify(inputs),
        "result": _jsonify(result),
        "warnings": warnings or [],
    }
    _write_text(out, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _params(args) -> ModelParams:
    return ModelParams(args.J, args.h)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_cost(args) -> int:
    p = _params(args)
    cc = ConditionedCost(p, args.t, args.alpha)
    ms = np.linspace(-1.0, 1.0, args.samples)
    _write_csv(args.out, ["m", "cost"], ((float(m), cost(cc, float(m))) for m in ms))
    return 0


def cmd_trajectory(args) -> int:
    p = _params(args)
    if args.m0 is not None:
        m0 = args.m0
    else:
        ms = global_minimizers(p, args.t, args.alpha)
        m0 = ms.m_hat
    traj = Trajectory(m0=m0, t=args.t, alpha=args.alpha)
    ss = np.linspace(0.0, args.t, args.samples)
    _write_csv(args.out, ["s", "phi"], ((float(s), float(traj(s))) for s in ss))
    return 0


def cmd_branch(args) -> int:
    p = _params(args)
    grid = np.linspace(args.t_max / args.samples, args.t_max, args.samples)
    track = branch_track(p, args.alpha, grid)
    _write_csv(args.out, ["t", "mhat", "jump"],
               ((q.t, q.m_hat, int(q.jump)) for q in track.points))
    return 0


def cmd_scenario(args) -> int:
    p = _params(args)
    rep = scenario(p, args.alpha)
    _write_report(args.out, "bifurcation_report",
                  {"J": args.J, "h": args.h, "alpha": args.alpha},
                  {"scenario": rep.scenario, "t_B": rep.t_B, "s_B": rep.s_B,
                   "t_T": rep.t_T,
                   "jumps": [{"time": j.time, "m_before": j.m_before,
                              "m_after": j.m_after} for j in rep.jumps]})
    return 0


def cmd_crossovers(args) -> int:
    p = _params(args)
    ct = crossover_times(p, validate=not args.no_validate,
                         with_h_star=args.with_h_star)
    _write_report(args.out, "crossover_times", {"J": args.J, "h": args.h},
                  {"psi_U": ct.psi_U, "psi_L": ct.psi_L, "psi_T": ct.psi_T,
                   "psi_star": ct.psi_star, "psi_c": ct.psi_c, "U_B": ct.U_B,
                   "L_B": ct.L_B, "M_T": ct.M_T, "M_B": ct.M_B,
                   "h_star": ct.h_star})
    return 0


def cmd_classify(args) -> int:
    p = _params(args)
    tl = gibbs_timeline(p, args.t_max)
    _write_report(args.out, "gibbs_timeline",
                  {"J": args.J, "h": args.h, "t_max": args.t_max},
                  {"segments": [
                      {"t_lo": s.t_lo,
                       "t_hi": s.t_hi if math.isfinite(s.t_hi) else "inf",
                       "status": s.status,
                       "bad_set_descriptor": s.bad_set_descriptor,
                       "expected_bad_count": s.expected_bad_count}
                      for s in tl.segments]})
    return 0


def cmd_speckernel(args) -> int:
    p = _params(args)
    ms = global_minimizers(p, args.t, args.alpha)
    if ms.degeneracy > 1:
        raise DomainError(
            f"alpha={args.alpha} is a bad magnetization at t={args.t} "
            f"({ms.degeneracy} global minimizers): the kernel is discontinuous there")
    m0 = ms.minima[0][0]
    sk = spec_kernel(args.t, args.alpha, m0, p)
    _write_report(args.out, "spec_kernel",
                  {"J": args.J, "h": args.h, "t": args.t, "alpha": args.alpha},
                  {"gamma_plus": sk.gamma_plus, "gamma_minus": sk.gamma_minus,
                   "m_hat": m0})
    return 0


def cmd_badset(args) -> int:
    p = _params(args)
    if args.t is not None:
        times = [args.t]
    else:
        times = np.linspace(args.t_max / args.samples, args.t_max, args.samples)
    rows = []
    for t in times:
        for a in bad_set(p, float(t)):
            rows.append((float(t), a))
    _write_csv(args.out, ["t", "alpha_bad"], rows)
    return 0


def cmd_oracle(args) -> int:
    p = _params(args)
    t0 = time.monotonic()
    warnings: list[str] = []
    if args.oracle == "path-dp":
        grid = PathGrid(time_steps=args.time_steps, mag_levels=args.grid,
                        t=args.t, alpha=args.alpha)
        res = path_dp(p, grid)
        ms = global_minimizers(p, args.t, args.alpha)
        best = min(c for _, c in ms.minima)
        start_err = min(abs(res.start - m) for m, _ in ms.minima)
        tol = args.tol if args.tol is not None else 5e-2
        passed = abs(res.value - best) <= tol and start_err <= 0.05
        comparison = {
            "dp_value": res.value, "dp_refined_value": res.refined_value,
            "dp_start": res.start, "analytic_min": best,
            "analytic_minimizers": [m for m, _ in ms.minima],
            "value_gap": res.value - best, "start_err": start_err,
            "tolerance": tol, "block": res.block,
        }
    elif args.oracle == "mc-kernel":
        cfg = MCConfig(N=args.N, replicas=args.replicas, window=args.window,
                       seed=args.seed)
        est = mc_spec_kernel(cfg, p, args.t, args.alpha)
        ms = global_minimizers(p, args.t, args.alpha)
        if ms.degeneracy > 1:
            warnings.append("alpha is a bad magnetization: analytic kernel ambiguous")
        gamma = spec_kernel(args.t, args.alpha, ms.minima[0][0], p).gamma_plus
        tol = max(3.0 * est.std_err, args.tol if args.tol is not None else 0.02)
        passed = abs(est.gamma_plus_hat - gamma) <= tol
        comparison = {
            "gamma_plus_hat": est.gamma_plus_hat, "std_err": est.std_err,
            "accepted": est.accepted, "analytic_gamma_plus": gamma,
            "abs_diff": abs(est.gamma_plus_hat - gamma), "tolerance": tol,
        }
    else:  # mc-posterior
        cfg = MCConfig(N=args.N, replicas=args.replicas, window=args.window,
                       seed=args.seed)
        levels, counts, accepted = mc_conditional_initial(cfg, p, args.t, args.alpha)
        ms = global_minimizers(p, args.t, args.alpha)
        mode = float(levels[int(np.argmax(counts))])
        mode_err = min(abs(mode - m) for m, _ in ms.minima)
        tol = args.tol if args.tol is not None else 0.1
        passed = mode_err <= tol
        comparison = {
            "mode": mode, "mode_err": mode_err, "accepted": accepted,
            "analytic_minimizers": [m for m, _ in ms.minima], "tolerance": tol,
        }
    result = {
        "passed": bool(passed),
        "comparison": comparison,
        "versions": {"cwgng": __version__, "numpy": np.__version__},
        "wall_clock_s": time.monotonic() - t0,
    }
    inputs = {k: v for k, v in vars(args).items()
              if k not in ("func", "out") and v is not None}
    _write_report(args.out, "run_report", inputs, result, warnings)
    return 0 if passed else 4


# ---------------------------------------------------------------------------
# scan
# ---------------------------------------------------------------------------

def _point_rows(quantity: str, J: float, h: float):
    p = ModelParams(J, h)
    if quantity == "m_infinity":
        return [(J, h, m_infinity(p))]
    if quantity == "psi_c":
        if h != 0.0 or J <= 1.0:
            return []
        return [(J, h, psi_c(J))]
    if quantity == "m_star":
        if h != 0.0 or J <= 1.5:
            return []
        return [(J, h, m_star(J))]
    if quantity == "m_one":
        if h != 0.0 or J <= 1.5:
            return []
        return [(J, h, m_one(J))]
    if quantity == "tangency_bounds":
        tb = tangency_bounds(p)
        return [(J, h, tb.U_B, tb.L_B)]
    if quantity == "crossovers":
        ct = crossover_times(p, validate=False)
        return [(J, h, ct.psi_U, ct.psi_L, ct.psi_T, ct.psi_star, ct.psi_c,
                 ct.U_B, ct.L_B, ct.M_T, ct.M_B)]
    raise DomainError(f"unknown scan quantity {quantity}")


_SCAN_HEADERS = {
    "m_infinity": ["J", "h", "m_infinity"],
    "psi_c": ["J", "h", "psi_c"],
    "m_star": ["J", "h", "m_star"],
    "m_one": ["J", "h", "m_one"],
    "tangency_bounds": ["J", "h", "U_B", "L_B"],
    "crossovers": ["J", "h", "psi_U", "psi_L", "psi_T", "psi_star", "psi_c",
                   "U_B", "L_B", "M_T", "M_B"],
    "cost_curve": ["J", "h", "t", "alpha", "m", "cost"],
}


def _scan_task(task):
    quantity, J, h = task
    return _point_rows(quantity, J, h)


def _cost_curve_rows(cfg: SweepConfig):
    ms = np.linspace(-1.0, 1.0, cfg.m_samples)
    for J in cfg.J_grid:
        for h in cfg.h_grid:
            p = ModelParams(float(J), float(h))
            for t in cfg.t_grid:
                for alpha in cfg.alpha_grid:
                    cc = ConditionedCost(p, float(t), float(alpha))
                    for m in ms:
                        yield (float(J), float(h), float(t), float(alpha),
                               float(m), cost(cc, float(m)))


def cmd_scan(args) -> int:
    cfg = load_config(args.config)
    if args.jobs is not None:
        cfg.jobs = args.jobs
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    files = []
    for quantity in cfg.quantities:
        name = f"{quantity}.csv"
        path = outdir / name
        if args.resume and path.exists():
            text = path.read_text(encoding="utf-8")
        else:
            if quantity == "cost_curve":
                rows = list(_cost_curve_rows(cfg))
            else:
                tasks = [(quantity, float(J), float(h))
                         for J in cfg.J_grid for h in cfg.h_grid]
                if cfg.jobs > 1:
                    with concurrent.futures.ProcessPoolExecutor(cfg.jobs) as pool:
                        chunks = list(pool.map(_scan_task, tasks))
                else:
                    chunks = [_scan_task(t) for t in tasks]
                rows = [row for chunk in chunks for row in chunk]
            buf = io.StringIO()
            buf.write(",".join(_SCAN_HEADERS[quantity]) + "\n")
            for row in rows:
                buf.write(",".join(_fmt(x) for x in row) + "\n")
            text = buf.getvalue()
            path.write_text(text, encoding="utf-8")
        files.append({
            "name": name,
            "quantity": quantity,
            "rows": text.count("\n") - 1,
            "sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
        })
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "kind": "scan_manifest",
        "inputs": {
            "J_grid": list(map(float, cfg.J_grid)),
            "h_grid": list(map(float, cfg.h_grid)),
            "alpha_grid": list(map(float, cfg.alpha_grid)),
            "t_grid": list(map(float, cfg.t_grid)),
            "quantities": list(cfg.quantities),
            "seed": cfg.seed,
        },
        "result": {"files": files},
        "warnings": [],
    }
    (outdir / "index.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_model_args(sp, alpha=False, t=False):
    sp.add_argument("--J", type=float, required=True, help="coupling J > 0")
    sp.add_argument("--h", type=float, default=0.0, help="external field")
    if alpha:
        sp.add_argument("--alpha", type=float, required=True,
                        help="conditioning endpoint in [-1, 1]")
    if t:
        sp.add_argument("--t", type=float, required=True, help="time horizon > 0")
    sp.add_argument("--out", type=str, default=None,
                    help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cwgng",
        description="Gibbs/non-Gibbs transition toolkit for the mean-field "
                    "spin model under independent flips")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("cost", help="conditioned cost curve m -> C(m) as CSV")
    _add_model_args(sp, alpha=True, t=True)
    sp.add_argument("--samples", type=int, default=401)
    sp.set_defaults(func=cmd_cost)

    sp = sub.add_parser("trajectory", help="optimal path s -> phi(s) as CSV")
    _add_model_args(sp, alpha=True, t=True)
    sp.add_argument("--m0", type=float, default=None,
                    help="start magnetization (default: global minimizer)")
    sp.add_argument("--samples", type=int, default=201)
    sp.set_defaults(func=cmd_trajectory)

    sp = sub.add_parser("branch", help="minimizer branch t -> m_hat(t) as CSV")
    _add_model_args(sp, alpha=True)
    sp.add_argument("--t-max", type=float, default=20.0)
    sp.add_argument("--samples", type=int, default=200)
    sp.set_defaults(func=cmd_branch)

    sp = sub.add_parser("scenario", help="bifurcation report as JSON")
    _add_model_args(sp, alpha=True)
    sp.set_defaults(func=cmd_scenario)

    sp = sub.add_parser("crossovers", help="crossover times as JSON")
    _add_model_args(sp)
    sp.add_argument("--with-h-star", action="store_true",
                    help="also compute the threshold field (slow)")
    sp.add_argument("--no-validate", action="store_true",
                    help="skip bad-set probes around each reported time")
    sp.set_defaults(func=cmd_crossovers)

    sp = sub.add_parser("classify", help="Gibbs/non-Gibbs timeline as JSON")
    _add_model_args(sp)
    sp.add_argument("--t-max", type=float, default=10.0)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("speckernel", help="limiting single-spin kernel as JSON")
    _add_model_args(sp, alpha=True, t=True)
    sp.set_defaults(func=cmd_speckernel)

    sp = sub.add_parser("badset", help="bad magnetizations as CSV")
    _add_model_args(sp)
    sp.add_argument("--t", type=float, default=None, help="single time")
    sp.add_argument("--t-max", type=float, default=2.0,
                    help="sweep horizon when --t is absent")
    sp.add_argument("--samples", type=int, default=40)
    sp.set_defaults(func=cmd_badset)

    sp = sub.add_parser("oracle", help="independent validation runs")
    sp.add_argument("oracle", choices=["path-dp", "mc-kernel", "mc-posterior"])
    _add_model_args(sp, alpha=True, t=True)
    sp.add_argument("--grid", type=int, default=400, help="DP magnetization levels")
    sp.add_argument("--time-steps", type=int, default=400, help="DP time steps")
    sp.add_argument("--N", type=int, default=200, help="MC spin count")
    sp.add_argument("--replicas", type=int, default=10 ** 5)
    sp.add_argument("--window", type=float, default=0.05)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=None,
                    help="override the pass/fail tolerance")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("scan", help="parameter sweep driven by a config file")
    sp.add_argument("--config", type=str, required=True)
    sp.add_argument("--out", type=str, required=True, help="output directory")
    sp.add_argument("--resume", action="store_true",
                    help="skip quantities whose output file already exists")
    sp.add_argument("--jobs", type=int, default=None)
    sp.set_defaults(func=cmd_scan)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except InsufficientAcceptanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except CwgngError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
