"""Proper online learners: recursive cover, flat-epoch cover and baselines."""

from __future__ import annotations

from ..errors import ConfigurationError
from .base import Commitment, OnlineLearner
from .baselines import ERMLearner, FixedLearner, erm_learner, fixed_function_learner
from .cover import CoverLearner, cover_learner
from .fast import RCoverFast
from .rcover import RCoverReference
from .schedule import (EpochSchedule, default_depth, flat_boundaries, default_scale,
                       default_epochs)

__all__ = [
    "Commitment", "OnlineLearner", "FixedLearner", "ERMLearner", "CoverLearner",
    "RCoverReference", "RCoverFast", "EpochSchedule", "default_depth",
    "flat_boundaries", "default_scale", "default_epochs", "erm_learner",
    "fixed_function_learner", "cover_learner", "rcover_classification_learner",
    "rcover_regression_learner", "make_learner", "LEARNERS",
]

LEARNERS = ("rcover", "cover", "erm", "fixed")


def rcover_classification_learner(cls, T, depth=None, engine="auto", memoize=True,
                                  seed=0, replication=0):
    """Recursive cover with eps = 0 labeling splits.

    ``engine="auto"`` picks the compiled engine for threshold classes and the
    reference engine otherwise; both give the same predictions.
    """
    if engine not in ("auto", "reference", "fast"):
        raise ConfigurationError(f"unknown engine {engine!r}")
    threshold = cls.kind in ("threshold", "product")
    if engine == "fast" or (engine == "auto" and threshold and memoize):
        return RCoverFast(cls, T, depth=depth, seed=seed, replication=replication)
    return RCoverReference(cls, T, depth=depth, memoize=memoize, seed=seed,
                           replication=replication)


def rcover_regression_learner(cls, T, epsilon, depth=None, memoize=True, seed=0,
                              replication=0):
    """Recursive cover whose children are eps-balls around an eps-cover."""
    if epsilon is None or epsilon < 0:
        raise ConfigurationError("regression needs a scale epsilon >= 0")
    return RCoverReference(cls, T, depth=depth, epsilon=epsilon, memoize=memoize,
                           seed=seed, replication=replication)


def make_learner(name, cls, T, *, sigma=None, epsilon=None, depth=None, engine="auto",
                 memoize=True, K=None, forecaster="hedge", member=None, seed=0,
                 replication=0):
    """Build a learner by name with harness-style parameters."""
    if name == "rcover":
        if epsilon is None or (epsilon == 0 and cls.binary and engine != "reference"):
            return rcover_classification_learner(cls, T, depth, engine, memoize, seed,
                                                 replication)
        return rcover_regression_learner(cls, T, epsilon, depth, memoize, seed, replication)
    if name == "cover":
        return CoverLearner(cls, T, K=K, sigma=sigma, forecaster=forecaster, seed=seed,
                            replication=replication)
    if name == "erm":
        return ERMLearner(cls, T)
    if name == "fixed":
        if member is None:
            member = tuple([0.5] * cls.d) if cls.kind != "finite" else 0
        return FixedLearner(cls, member, T)
    raise ConfigurationError(f"unknown learner {name!r}; choose from {LEARNERS}")
