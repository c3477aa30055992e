"""Epoch-wise cover learner.

The horizon is cut at T_k = floor(kT/K).  At the start of every epoch the
learner takes the eps=0 cover of the whole class on all queries seen so far
and runs a fresh expert forecaster (Hedge by default, or the doubling
forecaster) over it for the epoch.

For threshold classes the cover is the product over coordinates of the gap
representatives, and a round's loss only depends on the coordinate of x_t.
Hedge weights then factor into per-coordinate marginals, and so does the
doubling forecaster within a period, because its regrets reset as a whole.
:class:`CoverLearner` keeps the marginals; the explicit product forecaster is
used for finite classes (and, on request, for checking the factorization).
"""

from __future__ import annotations

import bisect
import math

import numpy as np

from .. import rng as krng
from ..errors import ConfigurationError
from ..experts import (AEXP, HEDGE, accumulate, advance, forecaster_init,
                       initial_eta, sample, weights)
from ..model import Cut, epsilon_cover, evaluate, full_space
from .base import OnlineLearner
from .schedule import flat_boundaries, default_epochs


class CoverLearner(OnlineLearner):
    name = "cover"

    def __init__(self, cls, T, K=None, sigma=None, forecaster="hedge", seed=0,
                 replication=0, stream="cover", factorized=None):
        super().__init__(cls, T)
        if K is None:
            if sigma is None:
                raise ConfigurationError("give the epoch count K or sigma for the default")
            K = default_epochs(T, cls.d, sigma)
        if K > T:
            raise ConfigurationError(f"K={K} > T={T}")
        self.K = int(K)
        self.bounds = flat_boundaries(T, self.K)
        if forecaster not in ("hedge", "aexp"):
            raise ConfigurationError(f"unknown forecaster {forecaster!r}")
        self.mode = forecaster
        self.stream = krng.stream_key(seed, replication, stream)
        threshold = cls.kind in ("threshold", "product")
        self.factorized = threshold if factorized is None else bool(factorized)
        if self.factorized and not threshold:
            raise ConfigurationError("factorized weights need a threshold class")
        self.epoch = 0
        self.history = []
        self.points = [[] for _ in range(cls.d)] if threshold else None
        self.cover_sizes = []
        self.preg = []

    # ------------------------------------------------------------- epochs
    def _start_epoch(self, e):
        self.epoch = e
        self.key = krng.combine_py(self.stream, e)
        length = self.bounds[e] - self.bounds[e - 1]
        if self.factorized:
            self.reps = [[None] + [z for z in zs if z < 1] for zs in self.points]
            sizes = [len(r) for r in self.reps]
            self.S = [np.zeros(n) for n in sizes]
            self.p = [np.empty(n) for n in sizes]
            self.fresh = [False] * len(sizes)
            log_k = sum(math.log(n) for n in sizes)
            self.log_k = log_k
            self.code = AEXP if self.mode == "aexp" else HEDGE
            self.eta = (initial_eta(log_k) if self.code == AEXP
                        else math.sqrt(2.0 * log_k / length))
            self.delta, self.delta_max, self.delta_total = 0.0, 1.0, 0.0
            self.cover_sizes.append(int(np.prod(sizes)))
        else:
            self.members = epsilon_cover(full_space(self.cls), self.history, 0.0)
            self.state = forecaster_init(len(self.members), self.mode, T=length)
            self.cover_sizes.append(len(self.members))

    def _on_commit(self, t):
        if self.epoch == 0 or t > self.bounds[self.epoch]:
            self._start_epoch(bisect.bisect_left(self.bounds, t))
        self._choice = None

    def _marginal(self, j):
        if not self.fresh[j]:
            weights(self.S[j], self.eta, self.p[j])
            self.fresh[j] = True
        return self.p[j]

    def _choices(self, t):
        if self._choice is None:
            if self.factorized:
                self._choice = [sample(self._marginal(j), krng.keyed_uniform(
                    krng.combine_py(self.key, j), t)) for j in range(len(self.S))]
            else:
                self._choice = self.state.choose(krng.keyed_uniform(self.key, t))
        return self._choice

    def _rep(self, j, g):
        z = self.reps[j][g]
        return Cut(0) if z is None else Cut(z, open=True)

    def _member(self, t):
        c = self._choices(t)
        if self.factorized:
            return tuple(self._rep(j, g) for j, g in enumerate(c))
        return self.members[c]

    def _value(self, t, x):
        c = self._choices(t)
        if self.factorized:
            k = x.coordinate - 1
            return self._rep(k, c[k])(x.position)
        return evaluate(self.cls, self.members[c], x)

    def _gap_predictions(self, k, z):
        reps = self.reps[k]
        return np.array([1.0] + [1.0 if z > r else 0.0 for r in reps[1:]])

    def _on_observe(self, t, x, loss):
        c = self._choices(t)
        if self.factorized:
            k = x.coordinate - 1
            preds = self._gap_predictions(k, x.position)
            if not (preds == preds[0]).all():
                losses = np.asarray(loss(preds), dtype=float)
                inc, _ = accumulate(self.S[k], self._marginal(k), losses, c[k])
                self.delta, self.delta_max, self.eta, reset = advance(
                    self.delta, self.delta_max, self.eta, inc, self.log_k, self.code)
                self.delta_total += inc
                if reset:
                    for s in self.S:
                        s[:] = 0.0
                    self.fresh = [False] * len(self.S)
                else:
                    self.fresh[k] = False
        else:
            preds = np.array([evaluate(self.cls, m, x) for m in self.members])
            self.state.update(c, np.asarray(loss(preds), dtype=float))
        self.history.append(x)
        if self.points is not None:
            zs = self.points[x.coordinate - 1]
            i = bisect.bisect_left(zs, x.position)
            if i == len(zs) or zs[i] != x.position:
                zs.insert(i, x.position)

    def stats(self) -> dict:
        return {"epoch": self.epoch, "cover": self.cover_sizes[-1] if self.cover_sizes else 0}


def cover_learner(T, K, cls, **kw) -> CoverLearner:
    return CoverLearner(cls, T, K=K, **kw)
