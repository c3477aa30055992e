"""Benchmark learners: a fixed function and follow-the-leader (ERM)."""

from __future__ import annotations

from ..model import HindsightOracle, canonical, evaluate, full_space
from .base import OnlineLearner


class FixedLearner(OnlineLearner):
    name = "fixed"

    def __init__(self, cls, member, T=None):
        super().__init__(cls, T)
        self.f = cls.member(member)

    def _value(self, t, x):
        return evaluate(self.cls, self.f, x)

    def _member(self, t):
        return self.f


class ERMLearner(OnlineLearner):
    """Commits to the best member on rounds 1..t-1 (canonical tie-break)."""

    name = "erm"

    def __init__(self, cls, T=None):
        super().__init__(cls, T)
        self.oracle = HindsightOracle(cls)
        self.f = canonical(full_space(cls))

    def _on_commit(self, t):
        if t > 1:
            self.f = self.oracle.best()[0]

    def _value(self, t, x):
        return evaluate(self.cls, self.f, x)

    def _member(self, t):
        return self.f

    def _on_observe(self, t, x, loss):
        self.oracle.add(x, loss)


def fixed_function_learner(cls, member, T=None) -> FixedLearner:
    return FixedLearner(cls, member, T)


def erm_learner(cls, T=None) -> ERMLearner:
    return ERMLearner(cls, T)
