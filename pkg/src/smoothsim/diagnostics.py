"""Non-stationarity and complexity statistics.

gamma_t0(t) is the largest mu_t-probability on which two members that agree on
the prefix x_1..x_t0 can disagree.  For threshold classes two members agree on
the prefix iff they sit in the same gap of each coordinate, and they disagree
on a half-open interval [theta_1, theta_2).  The supremum is therefore, per
coordinate, the largest mass strictly inside one gap, and these add up over
coordinates because the coordinates are disjoint parts of the instance space.

The tube form sup_{f in P} E|f - f*|^r (P = members within 2 eps of f* on the
prefix) is the regression analogue; Gamma_k sums it over an epoch.

The Monte-Carlo estimators work on the exact projection of the class onto the
sample points, so the inner supremum is a max over at most ``limit`` rows.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, EnumerationError
from .model import (Cut, Labeling, as_instance, evaluate, full_space, restrict)

ENUM_LIMIT = 10_000


# --------------------------------------------------------------------------
# helpers


def _prefix(prefix):
    """Split a prefix into (points, labels or None)."""
    if isinstance(prefix, Labeling):
        return [as_instance(p) for p in prefix.points], list(prefix.labels)
    items = list(prefix)
    if items and isinstance(items[0], tuple) and len(items[0]) == 2 \
            and not isinstance(items[0][0], (int, float)):
        return [as_instance(x) for x, _ in items], [y for _, y in items]
    return [as_instance(p) for p in items], None


def _check_realizable(cls, points, labels):
    if labels is not None:
        restrict(full_space(cls), Labeling(tuple(points), tuple(labels)))


def _coordinate_cuts(points, d):
    """Sorted distinct positions below 1, per coordinate."""
    out = [set() for _ in range(d)]
    for p in points:
        if p.coordinate > d:
            raise ConfigurationError(f"coordinate {p.coordinate} > d = {d}")
        if p.position < 1:
            out[p.coordinate - 1].add(p.position)
    return [sorted(s) for s in out]


def _gaps(zs):
    """Parameter cells (lo, hi] between consecutive cut points; lo None is closed at 0."""
    bounds = [None] + list(zs) + [1]
    return list(zip(bounds, bounds[1:]))


def _inside(lo, hi, z) -> bool:
    return (lo is None or z > lo) and z < hi


def _atoms_by_coordinate(mu_t, d):
    out = [[] for _ in range(d)]
    for x, p in mu_t.atoms:
        if x.coordinate > d:
            raise ConfigurationError(f"coordinate {x.coordinate} > d = {d}")
        out[x.coordinate - 1].append((x.position, p))
    return out


def _threshold_class(cls):
    if cls.kind not in ("threshold", "product"):
        raise ConfigurationError("closed forms exist for threshold classes only")


# --------------------------------------------------------------------------
# gamma, closed form


def gamma_exact(cls, prefix, mu_t):
    """sup over prefix-agreeing pairs f, g of P_{x ~ mu_t}(f(x) != g(x)).

    ``prefix`` is a :class:`Labeling`, a list of (x, y) pairs or a list of
    points.  Labels, when given, must be realizable.
    """
    _threshold_class(cls)
    points, labels = _prefix(prefix)
    _check_realizable(cls, points, labels)
    total = 0
    for zs, atoms in zip(_coordinate_cuts(points, cls.d), _atoms_by_coordinate(mu_t, cls.d)):
        best = 0
        for lo, hi in _gaps(zs):
            m = sum((p for z, p in atoms if _inside(lo, hi, z)), 0)
            best = max(best, m)
        total += best
    return total


def gamma_tube_exact(cls, fstar, prefix, mu_t, eps: float = 0.0, r: float = 1):
    """sup over f with max_prefix |f - f*| <= 2 eps of E_{mu_t}|f(x) - f*(x)|^r."""
    _threshold_class(cls)
    if r < 1:
        raise ConfigurationError("moment order r must be >= 1")
    fstar = cls.member(fstar)
    points, _ = _prefix(prefix)
    if 2 * eps >= 1:
        points = []
    total = 0
    for k, (zs, atoms) in enumerate(zip(_coordinate_cuts(points, cls.d),
                                        _atoms_by_coordinate(mu_t, cls.d))):
        c = fstar[k]
        lo, hi = next(g for g in _gaps(zs) if _cell_has(g, c))
        below = sum((p for z, p in atoms if _inside(lo, hi, z) and c(z) == 0), 0)
        above = sum((p for z, p in atoms if _inside(lo, hi, z) and c(z) == 1), 0)
        total += max(below, above)
    return total


def _cell_has(cell, c: Cut) -> bool:
    lo, hi = cell
    if c.at > hi or (c.at == hi and c.open):
        return False
    return lo is None or c.at > lo or (c.at == lo and c.open)


# --------------------------------------------------------------------------
# projections and the brute-force oracle


def _threshold_candidates(points, d):
    """One member per behavior on ``points``: Cut(0) and Cut(z, open) per gap."""
    per = []
    for zs in _coordinate_cuts(points, d):
        per.append([Cut(0)] + [Cut(z, open=True) for z in zs])
    return per


def projection(cls, points: Sequence, limit: int = ENUM_LIMIT) -> np.ndarray:
    """Distinct behaviors of the class on ``points`` as rows of a matrix."""
    points = [as_instance(p) for p in points]
    if cls.kind == "finite":
        cols = [cls.col(p) for p in points]
        rows = np.unique(cls.values[:, cols], axis=0)
        if rows.shape[0] > limit:
            raise EnumerationError(f"{rows.shape[0]} behaviors exceed {limit}")
        return rows.astype(float)
    per = _threshold_candidates(points, cls.d)
    count = math.prod(len(c) for c in per)
    if count > limit:
        raise EnumerationError(f"{count} behaviors exceed {limit}")
    rows = [[evaluate(cls, m, p) for p in points] for m in itertools.product(*per)]
    return np.unique(np.array(rows, dtype=float).reshape(count, len(points)), axis=0)


def gamma_bruteforce(cls, prefix, mu_t, r: float = 1, fstar=None, eps: float = 0.0,
                     limit: int = ENUM_LIMIT) -> float:
    """Exhaustive sup over the projected class on prefix + supp(mu_t).

    Pair form without ``fstar``; tube form sup_f E|f - f*|^r with it.
    """
    if r < 1:
        raise ConfigurationError("moment order r must be >= 1")
    points, labels = _prefix(prefix)
    _check_realizable(cls, points, labels)
    support = [x for x, _ in mu_t.atoms]
    w = np.array([float(p) for _, p in mu_t.atoms])
    B = projection(cls, points + support, limit)
    n = len(points)
    pre, on = B[:, :n], B[:, n:]
    if fstar is not None:
        ref = np.array([evaluate(cls, cls.member(fstar), x) for x in points + support])
        keep = np.all(np.abs(pre - ref[:n]) <= 2 * eps, axis=1) if n else np.ones(len(B), bool)
        return float((np.abs(on[keep] - ref[n:]) ** r @ w).max())
    best = 0.0
    groups: dict = {}
    for i, row in enumerate(map(tuple, pre)):
        groups.setdefault(row, []).append(i)
    for idx in groups.values():
        G = on[idx]
        for i in range(len(idx)):
            best = max(best, float((np.abs(G[i:] - G[i]) ** r @ w).max()))
    return best


# --------------------------------------------------------------------------
# per-round series and epoch statistics


def gamma_series(cls, points: Sequence, mus: Sequence, boundaries: Sequence,
                 fstar=None, eps: float = 0.0, r: float = 1) -> np.ndarray:
    """gamma(t) for t = 1..T with the prefix cut at the start of t's epoch.

    ``points[t-1]`` is x_t and ``mus[t-1]`` is mu_t.  Pair form by default,
    tube form around ``fstar`` otherwise.
    """
    points = [as_instance(p) for p in points]
    T = len(mus)
    out = np.zeros(T)
    for a, b in zip(boundaries, boundaries[1:]):
        prefix = points[:a]
        for t in range(a + 1, min(b, T) + 1):
            mu = mus[t - 1]
            if fstar is None:
                out[t - 1] = float(gamma_exact(cls, prefix, mu))
            else:
                out[t - 1] = float(gamma_tube_exact(cls, fstar, prefix, mu, eps, r))
    return out


def epoch_sums(series: Sequence, boundaries: Sequence) -> list:
    """Gamma_k = sum of the series over each epoch (T_{k-1}, T_k]."""
    series = np.asarray(series, dtype=float)
    return [float(series[a:b].sum()) for a, b in zip(boundaries, boundaries[1:])]


def epoch_violation_count(series: Sequence, boundaries: Sequence, q: float, w: float) -> int:
    """Number of epochs k with sum_{t in epoch} gamma(t) 1[gamma(t) >= q] >= w."""
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        return 0
    big = np.where(series >= q, series, 0.0)
    return sum(1 for a, b in zip(boundaries, boundaries[1:]) if a < series.size
               and big[a:b].sum() >= w)


# --------------------------------------------------------------------------
# Monte-Carlo complexities


@dataclass(frozen=True)
class WillsEstimate:
    m: int
    points: tuple
    draws: int
    estimate: float
    se: float
    log_estimate: float

    @property
    def log_se(self) -> float:
        """Delta-method standard error of log(estimate)."""
        return self.se / self.estimate if self.estimate > 0 else math.inf


@dataclass(frozen=True)
class GaussianEstimate:
    m: int
    draws: int
    estimate: float
    se: float
    wills: WillsEstimate

    @property
    def combined_se(self) -> float:
        return math.hypot(self.se, self.wills.log_se)

    @property
    def inequality_holds(self) -> bool:
        """ln W <= G within three combined standard errors."""
        return self.wills.log_estimate <= self.estimate + 3 * self.combined_se


def _batch_size(m, rows):
    return max(1, min(8192, 4_000_000 // max(1, m * rows)))


def _mc(B, draws, rng):
    """Per-draw sup_f <xi, f> - |f|^2/2 and sup_f <xi, f> in replication order."""
    rows, m = B.shape
    half = 0.5 * (B * B).sum(axis=1)
    s_w = np.empty(draws)
    s_g = np.empty(draws)
    step = _batch_size(m, rows)
    for i in range(0, draws, step):
        n = min(step, draws - i)
        xi = rng.standard_normal((n, m))
        inner = xi @ B.T
        s_w[i:i + n] = (inner - half).max(axis=1)
        s_g[i:i + n] = inner.max(axis=1)
    return s_w, s_g


def _wills_from(B, points, draws, s_w) -> WillsEstimate:
    top = s_w.max()
    e = np.exp(s_w - top)
    mean = e.mean()
    se = e.std(ddof=1) / math.sqrt(draws) if draws > 1 else 0.0
    log_est = float(top + math.log(mean))
    scale = math.exp(top) if top < 700 else math.inf
    return WillsEstimate(B.shape[1], tuple(points), draws, float(mean * scale),
                         float(se * scale), log_est)


def _draws(draws):
    if draws < 1:
        raise ConfigurationError("need at least one draw")
    return int(draws)


def wills_mc(cls, points: Sequence, draws: int = 100_000, rng=None,
             limit: int = ENUM_LIMIT) -> WillsEstimate:
    """Monte-Carlo Wills functional on the exact projection of the class.

    A single behavior has W = 1 exactly (the Gaussian moment generating
    function cancels the -|f|^2/2 term), which is returned without sampling.
    """
    draws = _draws(draws)
    points = [as_instance(p) for p in points]
    B = projection(cls, points, limit)
    if B.shape[0] == 1:
        return WillsEstimate(len(points), tuple(points), draws, 1.0, 0.0, 0.0)
    rng = np.random.default_rng(rng)
    s_w, _ = _mc(B, draws, rng)
    return _wills_from(B, points, draws, s_w)


def gaussian_complexity_mc(cls, points: Sequence, draws: int = 100_000, rng=None,
                           limit: int = ENUM_LIMIT) -> GaussianEstimate:
    """Monte-Carlo Gaussian complexity E sup_f <xi, f>, with the Wills estimate
    from the same draws."""
    draws = _draws(draws)
    points = [as_instance(p) for p in points]
    B = projection(cls, points, limit)
    if B.shape[0] == 1:
        w = WillsEstimate(len(points), tuple(points), draws, 1.0, 0.0, 0.0)
        return GaussianEstimate(len(points), draws, 0.0, 0.0, w)
    rng = np.random.default_rng(rng)
    s_w, s_g = _mc(B, draws, rng)
    se = float(s_g.std(ddof=1) / math.sqrt(draws)) if draws > 1 else 0.0
    return GaussianEstimate(len(points), draws, float(s_g.mean()), se,
                            _wills_from(B, points, draws, s_w))
