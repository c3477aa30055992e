"""Command line entry point: ``smoothsim <subcommand> ...``."""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .adversary import lowerbound_value
from .diagnostics import (epoch_sums, epoch_violation_count, gamma_series,
                          gaussian_complexity_mc)
from .errors import (ConfigurationError, EnumerationError, InvariantError,
                     SmoothnessViolation)
from .harness import io
from .harness.config import ExperimentConfig, load_config
from .harness.fit import fit_from_csv
from .harness.run import build_adversary, collect_history, run_experiment
from .harness.sweep import SWEEP_COLUMNS, sweep
from .learners.schedule import EpochSchedule, default_depth
from .model import Instance, ProductThreshold, Threshold1D
from .rng import generator


def _common(p):
    p.add_argument("--seed", type=int, help="override run.seed")
    p.add_argument("--reps", type=int, help="override run.reps")
    p.add_argument("--instrument", action="store_true", help="per-node counters in the trace")
    p.add_argument("--out", help="output directory (default run.out)")
    p.add_argument("--exact-rational", action="store_true",
                   help="rational positions and probabilities (small supports)")


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    kw = {}
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.reps is not None:
        kw["reps"] = args.reps
    if args.instrument:
        kw["instrument"] = True
    if args.exact_rational:
        kw["exact_rational"] = True
    if args.out:
        kw["out"] = args.out
    return cfg.replace(**kw) if kw else cfg


def _print_table(rows, cols):
    print("  ".join(cols))
    for r in rows:
        print("  ".join(_fmt(r.get(c)) for c in cols))


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    return "" if v is None else str(v)


def cmd_simulate(args) -> int:
    cfg = _config(args)
    res = run_experiment(cfg, out=cfg.out)
    _print_table(res.aggregate, ("learner", "T", "sigma", "d", "n",
                                 "mean_final_adaptive_regret", "stderr_final_adaptive_regret",
                                 "mean_mistakes"))
    print(f"max certificate ratio {res.max_ratio:.6g} (limit {1 / cfg.sigma:.6g})")
    print(f"wrote {Path(cfg.out).resolve()}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    out = io.ensure_dir(cfg.out) / "sweep.csv"
    rows = sweep(cfg, out=out)
    _print_table(rows, ("learner", "T", "sigma", "d", "mean_regret", "stderr_regret",
                        "peak_nodes", "error"))
    print(f"wrote {out}")
    return 1 if any(r.get("error") for r in rows) else 0


def _battery(configs: str) -> list:
    out = []
    for part in configs.split(";"):
        d, s, T = part.split(",")
        out.append((int(d), float(s), int(T)))
    return out


def cmd_lowerbound(args) -> int:
    base = _config(args)
    learners = tuple(v.strip() for v in args.learners.split(","))
    rows = []
    for d, s, T in _battery(args.configs):
        cfg = base.replace(adversary="lowerbound", d=d, sigma=s, T=T, learners=learners,
                           class_kind="product" if d > 1 else "threshold")
        res = run_experiment(cfg, keep_trace=False)
        bound = lowerbound_value(d, s, T)
        for agg in res.aggregate:
            m, se = agg["mean_mistakes"], agg["stderr_mistakes"]
            rows.append({"d": d, "sigma": s, "T": T, "learner": agg["learner"],
                         "reps": agg["n"], "mean_mistakes": m, "stderr": se, "bound": bound,
                         "max_ratio": res.max_ratio,
                         "verdict": "pass" if m >= bound - 3 * se else "FAIL"})
    cols = ("d", "sigma", "T", "learner", "reps", "mean_mistakes", "stderr", "bound",
            "max_ratio", "verdict")
    _print_table(rows, cols)
    out = io.ensure_dir(base.out) / "lowerbound.csv"
    io.write_rows(out, rows, cols)
    print(f"wrote {out}")
    return 0


def cmd_diagnose(args) -> int:
    cfg = _config(args)
    cls, fstar, points, mus = collect_history(cfg)
    P = cfg.depth if cfg.depth is not None else default_depth(cfg.T)
    sched = EpochSchedule(cfg.T, P)
    eps = cfg.epsilon or 0.0
    rows, violations = [], []
    for p in range(P + 1):
        b = sched.boundaries(p)
        pair = gamma_series(cls, points, mus, b)
        g1 = gamma_series(cls, points, mus, b, fstar=fstar, eps=eps, r=1)
        g2 = gamma_series(cls, points, mus, b, fstar=fstar, eps=eps, r=2)
        c1 = c2 = 0.0
        k = 0
        for t in range(1, cfg.T + 1):
            while t > b[k + 1]:
                k += 1
                c1 = c2 = 0.0
            c1 += g1[t - 1]
            c2 += g2[t - 1]
            rows.append({"t": t, "p": p, "epoch": k + 1, "gamma": pair[t - 1],
                         "gamma_r1": g1[t - 1], "gamma_r2": g2[t - 1],
                         "Gamma_r1": c1, "Gamma_r2": c2})
        violations.append((p, epoch_violation_count(pair, b, args.q, args.w),
                           max(epoch_sums(pair, b))))
    out = io.ensure_dir(cfg.out) / "gamma.csv"
    io.write_rows(out, rows, ("t", "p", "epoch", "gamma", "gamma_r1", "gamma_r2",
                              "Gamma_r1", "Gamma_r2"))
    print("p  violations(q={}, w={})  max_Gamma".format(args.q, args.w))
    for p, v, g in violations:
        print(f"{p}  {v}  {g:.4g}")
    print(f"wrote {out}")
    return 0


def cmd_wills(args) -> int:
    cfg = _config(args)
    cls = Threshold1D() if cfg.d == 1 else ProductThreshold(cfg.d)
    ms = [int(v) for v in args.m.split(",")]
    rng = generator(cfg.seed, 0, "wills-points")
    if getattr(args, "config", None):
        base = build_adversary(cfg, 0).base
        pool = [base.sample(u) for u in rng.random(max(ms))]
    else:
        ks = rng.integers(1, cfg.d + 1, size=max(ms))
        pool = [Instance(int(k), float(z)) for k, z in zip(ks, rng.random(max(ms)))]
    rows = []
    for m in ms:
        g = gaussian_complexity_mc(cls, pool[:m], args.draws, generator(cfg.seed, m, "wills"))
        rows.append({"m": m, "wills": g.wills.estimate, "wills_se": g.wills.se,
                     "log_wills": g.wills.log_estimate, "gaussian": g.estimate,
                     "gaussian_se": g.se, "ln_w_le_g": g.inequality_holds})
    cols = ("m", "wills", "wills_se", "log_wills", "gaussian", "gaussian_se", "ln_w_le_g")
    _print_table(rows, cols)
    out = io.ensure_dir(cfg.out) / "wills.csv"
    io.write_rows(out, rows, cols)
    print(f"wrote {out}")
    return 0


def cmd_fit(args) -> int:
    where = {"learner": args.learner} if args.learner else None
    slope, intercept, r2 = fit_from_csv(args.csv, args.x, args.y, where)
    print(f"slope {slope:.4f}  intercept {intercept:.4f}  R2 {r2:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="smoothsim",
                                 description="Online learning against smooth adversaries.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one config")
    p.add_argument("config")
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run the grid.* axes of a config")
    p.add_argument("config")
    _common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("lowerbound", help="lower-bound battery against every learner")
    p.add_argument("--configs", default="1,0.25,300;3,0.1,2000",
                   help="d,sigma,T triples separated by ';'")
    p.add_argument("--learners", default="rcover,cover,erm,fixed")
    _common(p)
    p.set_defaults(func=cmd_lowerbound, reps=None)

    p = sub.add_parser("diagnose-gamma", aliases=["diagnose"],
                       help="per-round gamma and epoch sums for one replication")
    p.add_argument("config")
    p.add_argument("--q", type=float, default=0.5, help="gamma threshold of the violation count")
    p.add_argument("--w", type=float, default=1.0, help="epoch-sum threshold")
    _common(p)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("estimate-wills", help="Monte-Carlo Wills functional and Gaussian complexity")
    p.add_argument("config", nargs="?")
    p.add_argument("--m", default="4,8,16,32", help="sample sizes (nested point sets)")
    p.add_argument("--draws", type=int, default=100_000)
    _common(p)
    p.set_defaults(func=cmd_wills)

    p = sub.add_parser("fit", help="log-log slope from a summary CSV")
    p.add_argument("csv")
    p.add_argument("--x", default="T")
    p.add_argument("--y", default="mean_final_adaptive_regret")
    p.add_argument("--learner")
    p.set_defaults(func=cmd_fit)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SmoothnessViolation, InvariantError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ConfigurationError, EnumerationError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
