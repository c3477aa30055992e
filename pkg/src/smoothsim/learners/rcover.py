"""Recursive cover learner, reference implementation.

A node owns a version space, a dyadic epoch (start, end] at some depth and,
for each half of its epoch, a doubling forecaster over its children plus the
fixed function f_S (the canonical member of its space).  Children for the
half (T_a, T_{a+1/2}] are built after round T_a:

* classification: one child per realizable labeling, within the node's space,
  of the queries the node has seen since its start;
* regression: one child F(S) cap B_f(eps, T_a) per member f of an eps-cover of
  the node's space on all queries up to T_a.

Nodes are created lazily and only touched on rounds where their space is not
unanimous at x_t.  Skipping is exact: when every expert predicts the same
value the regrets r_i are all zero and the forecaster does not move.  Random
draws are keyed by (node, t), so skipped draws do not shift other draws.

With ``memoize=True`` nodes are shared through a table keyed by
(depth, epoch start, version space).  ``memoize=False`` instantiates a fresh
node per parent, as written in the algorithm; equal keys give equal random
streams, so both modes produce the same predictions.
"""

from __future__ import annotations

from collections import Counter
from functools import lru_cache

import numpy as np

from .. import rng as krng
from ..experts import forecaster_init
from ..model import (FiniteSpace, canonical, epsilon_cover, evaluate,
                     full_space, restrict, split, unanimous)
from .base import OnlineLearner
from .schedule import EpochSchedule, default_depth, split_point


@lru_cache(maxsize=1 << 16)
def _vh(v):
    return krng.value_hash(v)


def space_hash(space) -> np.uint64:
    if isinstance(space, FiniteSpace):
        return krng.digest64("members", *space.members)
    lo = [krng.LOW_SENTINEL if a is None else _vh(a) for a in space.lo]
    hi = [_vh(b) for b in space.hi]
    return krng.cell_hash(lo, hi)


class _Node:
    __slots__ = ("depth", "start", "mid", "end", "space", "hash", "fs", "alpha",
                 "experts", "by_alpha", "state", "delta_sum", "stamp", "pred",
                 "preds", "chosen")

    def __init__(self, depth, start, end, space, stream):
        self.depth, self.start, self.end = depth, start, end
        self.mid = split_point(start, end)
        self.space = space
        self.hash = krng.node_hash(stream, depth, start, space_hash(space))
        self.fs = canonical(space)
        self.alpha = -1
        self.experts = []
        self.by_alpha = {}
        self.state = None
        self.delta_sum = 0.0
        self.stamp = -1
        self.pred = None
        self.preds = None
        self.chosen = 0


class RCoverReference(OnlineLearner):
    """Reference engine for any class; ``epsilon=None`` selects classification."""

    name = "rcover"

    def __init__(self, cls, T, depth=None, epsilon=None, memoize=True, seed=0,
                 replication=0, stream="rcover"):
        super().__init__(cls, T)
        self.P = default_depth(T) if depth is None else int(depth)
        self.schedule = EpochSchedule(T, self.P)
        self.epsilon = epsilon
        self.memoize = memoize
        self.stream = krng.stream_key(seed, replication, stream)
        self.table = {}
        self.created = Counter()
        self.history = []
        self.root = self._node(self.P, 0, T, full_space(cls))
        self._stamp = 0
        self._stamp_for = None
        self._touched = []

    # ---------------------------------------------------------------- nodes
    def _node(self, depth, start, end, space):
        key = (depth, start, space.key())
        if self.memoize and key in self.table:
            return self.table[key]
        node = _Node(depth, start, end, space, self.stream)
        self.table.setdefault(key, node)
        self.created[(depth, start)] += 1
        return node

    def _activate(self, n, alpha):
        t_a = n.start if alpha == 0 else n.mid
        if self.epsilon is None:
            subs = [sub for _, sub in split(n.space, self.history[n.start:t_a])]
        else:
            prefix = self.history[:t_a]
            subs = [restrict(n.space, (f, prefix, self.epsilon))
                    for f in epsilon_cover(n.space, prefix, self.epsilon)]
        lo, hi = (n.start, n.mid) if alpha == 0 else (n.mid, n.end)
        n.experts = [self._node(n.depth - 1, lo, hi, s) for s in subs]
        n.by_alpha[alpha] = n.experts
        n.state = forecaster_init(len(n.experts) + 1)
        n.alpha = alpha

    def _ensure(self, n, t):
        alpha = 0 if t <= n.mid else 1
        if n.alpha != alpha:
            self._activate(n, alpha)

    # ----------------------------------------------------------- evaluation
    def _eval(self, n, t, x):
        if n.stamp == self._stamp:
            return n.pred
        n.stamp = self._stamp
        v = unanimous(n.space, x)
        if v is not None:
            n.pred = v
            return v
        if n.depth == 0:
            n.pred = evaluate(self.cls, n.fs, x)
            return n.pred
        self._ensure(n, t)
        preds = [evaluate(self.cls, n.fs, x)] + [self._eval(c, t, x) for c in n.experts]
        if all(p == preds[0] for p in preds):
            n.pred = preds[0]
            return n.pred
        n.preds = preds
        n.chosen = n.state.choose(krng.keyed_uniform(n.hash, t))
        self._touched.append(n)
        n.pred = preds[n.chosen]
        return n.pred

    def _evaluate_round(self, t, x):
        if self._stamp_for != (t, x):
            self._stamp += 1
            self._stamp_for = (t, x)
            self._touched = []
            self._eval(self.root, t, x)
        return self.root.pred

    def _value(self, t, x):
        return self._evaluate_round(t, x)

    def _member(self, t):
        n = self.root
        while n.depth > 0:
            self._ensure(n, t)
            j = n.state.choose(krng.keyed_uniform(n.hash, t))
            if j == 0:
                break
            n = n.experts[j - 1]
        return n.fs

    def _on_observe(self, t, x, loss):
        self._evaluate_round(t, x)
        for n in self._touched:
            n.delta_sum += n.state.update(n.chosen, np.array([loss(v) for v in n.preds]))
        self._touched = []
        self.history.append(x)
        self._stamp_for = None

    # ------------------------------------------------------ instrumentation
    def node_counts(self) -> dict:
        """Materialized nodes per (depth, epoch start)."""
        return dict(self.created)

    def trajectory(self, member) -> list:
        """Nodes whose space contains ``member``: (depth, start, end, Delta, f_S)."""
        out, frontier = [], [self.root]
        while frontier:
            n = frontier.pop()
            out.append((n.depth, n.start, n.end, n.delta_sum, n.fs))
            for alpha in (1, 0):
                for c in n.by_alpha.get(alpha, []):
                    if c.space.contains(member):
                        frontier.append(c)
                        break
        return sorted(out, key=lambda r: (-r[0], r[1]))

    def stats(self) -> dict:
        return {"nodes": sum(self.created.values()), "touched": len(self._touched)}
