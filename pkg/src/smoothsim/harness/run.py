"""Seeded replications of the online protocol with regret ledgers.

Round t: the adversary announces mu_t and its smoothness certificate, the
learner commits, x_t ~ mu_t is drawn, the committed function predicts, the
loss is revealed and both ledgers advance.  A failed certificate aborts the
run with :class:`~smoothsim.errors.SmoothnessViolation`.
"""

from __future__ import annotations

import hashlib
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .. import adversary as adv_mod
from ..errors import ConfigurationError, InvariantError, SmoothnessViolation
from ..learners import make_learner
from ..model import HindsightOracle, Instance, ProductThreshold, Threshold1D, evaluate
from ..rng import generator
from . import io
from .config import ExperimentConfig, dump_config

LEDGER_TOL = 1e-9


class RegretLedger:
    """Cumulative loss, oblivious regret against f* and adaptive regret."""

    def __init__(self, cls, fstar=None):
        self.cls = cls
        self.fstar = None if fstar is None else cls.member(fstar)
        self.oracle = HindsightOracle(cls)
        self.t = 0
        self.cum_loss = 0.0
        self.cum_fstar = 0.0
        self.mistakes = 0
        self.adaptive = 0.0
        self.oblivious = math.nan if fstar is None else 0.0

    def update(self, x, yhat, loss) -> None:
        self.t += 1
        step = float(loss(yhat))
        if step < 0:
            raise InvariantError("negative loss")
        self.cum_loss += step
        if loss.label is not None and yhat != loss.label:
            self.mistakes += 1
        self.oracle.add(x, loss)
        best = self.oracle.best()[1]
        self.adaptive = self.cum_loss - best
        if self.fstar is not None:
            self.cum_fstar += float(loss(evaluate(self.cls, self.fstar, x)))
            self.oblivious = self.cum_loss - self.cum_fstar
            if best > self.cum_fstar + LEDGER_TOL:
                raise InvariantError(
                    f"round {self.t}: best-in-hindsight loss {best} exceeds f* loss "
                    f"{self.cum_fstar}")


# --------------------------------------------------------------------------
# builders


def build_class(cfg: ExperimentConfig):
    return Threshold1D() if cfg.class_kind == "threshold" else ProductThreshold(cfg.d)


def _grid(cfg):
    n = cfg.support
    return [Instance(k, Fraction(2 * i + 1, 2 * n)) for k in range(1, cfg.d + 1)
            for i in range(n)]


def _fstar(cfg):
    if cfg.fstar is None:
        return tuple([Fraction(1, 2)] * cfg.d)
    if len(cfg.fstar) != cfg.d:
        raise ConfigurationError("adversary.fstar needs one value per coordinate")
    return cfg.fstar


def build_adversary(cfg: ExperimentConfig, replication: int):
    rng = generator(cfg.seed, replication, "adversary")
    cls = build_class(cfg)
    D = adv_mod.DiscreteDistribution
    exact = cfg.exact_rational
    if cfg.adversary == "lowerbound":
        return adv_mod.lowerbound_adversary(cfg.d, cfg.sigma, cfg.T, rng, exact=exact)
    if cfg.adversary == "mixture":
        return adv_mod.bisection_mixture(cfg.d, cfg.sigma, cfg.T, rng, q=cfg.q,
                                         noise=cfg.noise, loss=cfg.loss, exact=exact)
    labeler = adv_mod.Labeler(cls, _fstar(cfg), noise=cfg.noise, loss=cfg.loss)
    grid = _grid(cfg)
    if cfg.adversary == "iid":
        return adv_mod.IIDAdversary(D.uniform(grid, exact=exact), labeler, rng, sigma=cfg.sigma)
    R = cfg.regions or min(len(grid), math.floor(1 / cfg.sigma + 1e-12))
    blocks = [grid[i * len(grid) // R:(i + 1) * len(grid) // R] for i in range(R)]
    regions = [D.uniform(b, exact=exact) for b in blocks]
    switches = [r * cfg.T // R for r in range(1, R)]
    return adv_mod.switching_adversary(cfg.sigma, regions, switches, labeler, rng, exact=exact)


def build_learner(cfg: ExperimentConfig, name: str, cls, replication: int):
    member = cfg.member
    return make_learner(name, cls, cfg.T, sigma=cfg.sigma, epsilon=cfg.epsilon,
                        depth=cfg.depth, engine=cfg.engine, memoize=cfg.memoize, K=cfg.K,
                        forecaster=cfg.forecaster, member=member, seed=cfg.seed,
                        replication=replication)


# --------------------------------------------------------------------------
# replications


def config_digest(cfg: ExperimentConfig) -> str:
    return hashlib.blake2b(dump_config(cfg).encode(), digest_size=4).hexdigest()


@dataclass
class ReplicationResult:
    summary: dict
    records: list = field(default_factory=list)
    max_ratio: float = 0.0
    peak_nodes: int = 0


def _instrumentation(learner) -> dict:
    return {k: int(v) if isinstance(v, (int, bool)) or hasattr(v, "item") else v
            for k, v in learner.stats().items()}


def _final_instrumentation(learner, fstar, replication) -> dict:
    rec = {"rep": replication, "type": "nodes"}
    if hasattr(learner, "node_counts"):
        rec["counts"] = {f"{p}:{s}": n for (p, s), n in sorted(learner.node_counts().items())}
    if hasattr(learner, "trajectory") and fstar is not None:
        rec["fstar_path"] = [[p, s, e, float(delta)] for p, s, e, delta, _ in
                             learner.trajectory(fstar)]
    return rec


def run_replication(cfg: ExperimentConfig, learner_name: str, replication: int,
                    keep_trace: bool = True) -> ReplicationResult:
    """One seeded run of ``learner_name`` against the configured adversary."""
    adversary = build_adversary(cfg, replication)
    cls = adversary.cls
    learner = build_learner(cfg, learner_name, cls, replication)
    ledger = RegretLedger(cls, adversary.fstar)
    records = []
    peak = 0
    ex = cfg.exact_rational
    start = time.perf_counter()
    for t in range(1, cfg.T + 1):
        adversary.distribution(t)
        cert = adversary.certificate()
        if not cert.passed:
            raise SmoothnessViolation(
                f"round {t}: density ratio {float(cert.ratio)!r} exceeds 1/sigma = "
                f"{1 / float(cert.sigma)!r} ({adversary.kind}, replication {replication})")
        commit = learner.commit()
        x = adversary.draw()
        yhat = commit(x)
        loss = adversary.respond(x)
        learner.observe(x, loss)
        ledger.update(x, yhat, loss)
        stats = _instrumentation(learner) if (cfg.instrument or learner_name == "rcover") else {}
        peak = max(peak, int(stats.get("nodes", 0)))
        if keep_trace:
            rec = {"rep": replication, "t": t,
                   "x": {"k": x.coordinate, "pos": io.number(x.position, ex)},
                   "yhat": io.number(yhat), "loss": float(loss(yhat)),
                   "cum_adaptive": ledger.adaptive, "cum_oblivious": ledger.oblivious,
                   "cert_ratio": io.number(cert.ratio, ex)}
            if cfg.instrument:
                rec["inst"] = stats
            records.append(rec)
    wall = (time.perf_counter() - start) * 1000.0
    if keep_trace and cfg.instrument:
        records.append(_final_instrumentation(learner, adversary.fstar, replication))
    summary = {
        "run_id": f"{config_digest(cfg)}-{learner_name}-r{replication}",
        "seed": cfg.seed, "learner": learner_name, "T": cfg.T, "sigma": cfg.sigma,
        "d": cfg.d, "epsilon": cfg.epsilon, "depth": cfg.depth,
        "final_adaptive_regret": ledger.adaptive,
        "final_oblivious_regret": ledger.oblivious,
        "mistakes": ledger.mistakes, "wall_ms": round(wall, 3),
    }
    return ReplicationResult(summary, records, float(adversary.max_ratio), peak)


def _task(args):
    cfg, name, rep, keep = args
    return run_replication(cfg, name, rep, keep)


@dataclass
class ExperimentResult:
    rows: list
    aggregate: list
    traces: dict
    max_ratio: float
    peak_nodes: int


def run_experiment(cfg: ExperimentConfig, out=None, keep_trace: bool | None = None,
                   workers: int | None = None) -> ExperimentResult:
    """All learners x replications; results are gathered in replication order.

    With ``out`` the traces go to ``trace-<learner>.jsonl`` and the per-run and
    aggregated summaries to ``summary.csv`` and ``aggregate.csv``.
    """
    keep = (out is not None) if keep_trace is None else keep_trace
    tasks = [(cfg, name, rep, keep) for name in cfg.learners for rep in range(cfg.reps)]
    workers = cfg.workers if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_task, tasks))
    else:
        results = [_task(t) for t in tasks]
    rows = [r.summary for r in results]
    traces: dict = {}
    for (_, name, _, _), r in zip(tasks, results):
        traces.setdefault(name, []).extend(r.records)
    agg = io.aggregate(rows)
    result = ExperimentResult(rows, agg, traces if keep else {},
                              max(r.max_ratio for r in results),
                              max(r.peak_nodes for r in results))
    if out is not None:
        d = io.ensure_dir(out)
        for name, recs in traces.items():
            io.write_trace(Path(d) / f"trace-{name}.jsonl", recs)
        io.write_summary(Path(d) / "summary.csv", rows)
        io.write_aggregate(Path(d) / "aggregate.csv", agg)
    return result


def collect_history(cfg: ExperimentConfig, learner_name: str | None = None,
                    replication: int = 0) -> tuple:
    """Play one replication and return (cls, fstar, points, distributions)."""
    adversary = build_adversary(cfg, replication)
    cls = adversary.cls
    learner = build_learner(cfg, learner_name or cfg.learners[0], cls, replication)
    points, mus = [], []
    for t in range(1, cfg.T + 1):
        mus.append(adversary.distribution(t))
        if not adversary.certificate().passed:
            raise SmoothnessViolation(f"round {t}: certificate failed")
        commit = learner.commit()
        x = adversary.draw()
        commit(x)
        loss = adversary.respond(x)
        learner.observe(x, loss)
        points.append(x)
    return cls, adversary.fstar, points, mus
