import math
from fractions import Fraction

import numpy as np
import pytest

from smoothsim.adversary import DiscreteDistribution, Labeler, iid_adversary
from smoothsim.errors import ConfigurationError, ProtocolError
from smoothsim.learners import (CoverLearner, EpochSchedule, ERMLearner, FixedLearner,
                                RCoverFast, RCoverReference, default_depth, flat_boundaries,
                                make_learner, rcover_classification_learner,
                                rcover_regression_learner, default_scale,
                                default_epochs)
from smoothsim.model import (Absolute, Cut, FiniteClass, Instance, ProductThreshold,
                             Threshold1D, sauer_bound)

T1 = Threshold1D()


def stream(d, T, seed, grid=16):
    rng = np.random.default_rng(seed)
    xs = [Instance(int(k), Fraction(int(v), grid))
          for k, v in zip(rng.integers(1, d + 1, T), rng.integers(0, grid + 1, T))]
    ys = [int(y) for y in rng.integers(0, 2, T)]
    return xs, ys


def play(learner, xs, ys):
    out = []
    for x, y in zip(xs, ys):
        c = learner.commit()
        out.append(c(x))
        learner.observe(x, Absolute(y))
    return out


# ---------------------------------------------------------------- schedules


def test_default_depth_and_scale():
    assert default_depth(16) == 4
    assert default_depth(1000) == 9
    assert default_depth(1) == 0
    assert default_scale(1000) == 0.001
    assert default_scale(1000, "poly", 1) == pytest.approx(math.sqrt(math.log(1000) / 1000))
    with pytest.raises(ConfigurationError):
        EpochSchedule(7, 3)


def test_flat_epochs():
    assert default_epochs(1000, 1, 0.1) == 320
    assert flat_boundaries(10, 3) == [0, 3, 6, 10]
    with pytest.raises(ConfigurationError):
        flat_boundaries(5, 6)
    with pytest.raises(ConfigurationError):
        CoverLearner(T1, 5, K=6)


def test_epoch_lengths_exhaustive():
    # depth-p boundaries only depend on the number of halvings P - p, so every
    # (T, P, p) combination appears below at the largest depth
    for T in range(1, 4097):
        s = EpochSchedule(T, default_depth(T))
        finest = np.array(s.boundaries(0))
        for p in range(s.P + 1):
            b = finest[:: 2**p]
            assert b[0] == 0 and b[-1] == T
            N = 2 ** (s.P - p)
            lengths = np.diff(b)
            assert lengths.size == N
            assert set(np.unique(lengths)) <= {T // N, T // N + 1}
            assert s.boundaries(p) == b.tolist() if T % 512 == 0 else True


def test_epoch_of():
    s = EpochSchedule(10, 2)
    assert s.epochs(0) == [(0, 2), (2, 5), (5, 7), (7, 10)]
    assert [s.epoch_of(0, t) for t in (1, 2, 3, 10)] == [1, 1, 2, 4]


# ---------------------------------------------------------------- protocol


def test_protocol_order():
    L = FixedLearner(T1, 0.5, T=2)
    with pytest.raises(ProtocolError):
        L.observe(Instance(1, 0.2), Absolute(0))
    c = L.commit()
    with pytest.raises(ProtocolError):
        L.commit()
    L.observe(Instance(1, 0.2), Absolute(0))
    with pytest.raises(ProtocolError):
        c(Instance(1, 0.2))  # stale commitment
    L.commit()
    L.observe(Instance(1, 0.2), Absolute(0))
    with pytest.raises(ProtocolError):
        L.commit()


# ---------------------------------------------------------------- baselines


def test_fixed_learner_examples():
    L = FixedLearner(T1, 0.5)
    xs = [Instance(1, z) for z in (0.1, 0.6, 0.5, 0.9)]
    assert play(L, xs, [0, 1, 1, 1]) == [0, 1, 1, 1]
    L = FixedLearner(T1, 0)
    assert play(L, xs, [0] * 4) == [1] * 4
    assert make_learner("fixed", ProductThreshold(2), 4).commit().member() == (Cut(0.5),) * 2


def test_erm_examples():
    L = ERMLearner(T1)
    c = L.commit()
    assert c.member() == (Cut(0),)
    L.observe(Instance(1, 0.4), Absolute(1))
    L.commit()
    L.observe(Instance(1, 0.6), Absolute(1))
    assert L.commit().member() == (Cut(0),)


def test_erm_realizable_mistake_rate():
    rates = []
    grid = [Instance(1, Fraction(i, 64)) for i in range(65)]
    for seed in range(50):
        adv = iid_adversary(DiscreteDistribution.uniform(grid), Labeler(T1, 0.5),
                            np.random.default_rng(seed))
        L = ERMLearner(T1)
        late = 0
        for t in range(1, 501):
            adv.distribution(t)
            c = L.commit()
            x = adv.draw()
            loss = adv.respond(x)
            late += t > 250 and c(x) != loss.label
            L.observe(x, loss)
        rates.append(late / 250)
    assert np.mean(rates) < 0.05


# ---------------------------------------------------------------- cover


def test_cover_single_epoch_is_fixed():
    xs, ys = stream(1, 30, 0)
    L = CoverLearner(T1, 30, K=1)
    members = []
    for x, y in zip(xs, ys):
        members.append(L.commit().member())
        L.observe(x, Absolute(y))
    assert set(members) == {(Cut(0),)}
    assert L.cover_sizes == [1]


@pytest.mark.parametrize("d,mode", [(1, "hedge"), (2, "hedge"), (2, "aexp"), (3, "aexp")])
def test_cover_factorization(d, mode):
    cls = T1 if d == 1 else ProductThreshold(d)
    for seed in range(4):
        xs, ys = stream(d, 40, seed, grid=8)
        fact = CoverLearner(cls, 40, K=5, forecaster=mode, seed=seed)
        flat = CoverLearner(cls, 40, K=5, forecaster=mode, seed=seed, factorized=False)
        for x, y in zip(xs, ys):
            fact.commit()(x)
            flat.commit()(x)
            fact.observe(x, Absolute(y))
            flat.observe(x, Absolute(y))
        assert fact.cover_sizes == flat.cover_sizes
        assert fact.cover_sizes[-1] <= sauer_bound(len(xs), d)


def test_cover_marginals_match_product_weights():
    cls = ProductThreshold(2)
    xs, ys = stream(2, 19, 3, grid=8)
    fact = CoverLearner(cls, 20, K=2, seed=0)
    flat = CoverLearner(cls, 20, K=2, seed=0, factorized=False)
    for x, y in zip(xs, ys):
        fact.commit()
        flat.commit()
        fact.observe(x, Absolute(y))
        flat.observe(x, Absolute(y))
    fact.commit()
    flat.commit()
    joint = flat.state.probabilities()
    marg = [fact._marginal(j) for j in range(2)]
    prod = np.multiply.outer(*marg).ravel()
    members = flat.members
    index = {tuple(m): i for i, m in enumerate(members)}
    for a in range(len(fact.reps[0])):
        for b in range(len(fact.reps[1])):
            m = (fact._rep(0, a), fact._rep(1, b))
            assert prod[a * len(fact.reps[1]) + b] == pytest.approx(joint[index[m]], abs=1e-12)


def test_cover_on_finite_class():
    U = [Instance(1, z) for z in (0.1, 0.2, 0.3)]
    F = FiniteClass(np.array([[0, 0, 1], [0, 1, 1], [1, 1, 1.0]]), U)
    L = CoverLearner(F, 9, K=3)
    play(L, [U[i % 3] for i in range(9)], [0, 1, 1] * 3)
    assert L.cover_sizes == [1, 3, 3]


# ---------------------------------------------------------------- recursive cover


def test_rcover_depth_zero_is_fixed():
    xs, ys = stream(1, 20, 1)
    members = set()
    L = RCoverReference(T1, 20, depth=0)
    for x, y in zip(xs, ys):
        members.add(L.commit().member())
        L.observe(x, Absolute(y))
    assert members == {(Cut(0),)}
    F = RCoverFast(T1, 20, depth=0)
    assert play(F, xs, ys) == [1] * 20


@pytest.mark.parametrize("d", [1, 2, 3])
def test_engines_agree(d):
    cls = T1 if d == 1 else ProductThreshold(d)
    T = 64 if d < 3 else 32
    for seed in range(6):
        xs, ys = stream(d, T, seed)
        ref = play(RCoverReference(cls, T, seed=seed), xs, ys)
        assert play(RCoverFast(cls, T, seed=seed), xs, ys) == ref
        assert play(RCoverReference(cls, T, seed=seed, epsilon=0.0), xs, ys) == ref


def test_engine_selection():
    assert isinstance(rcover_classification_learner(T1, 8), RCoverFast)
    assert isinstance(rcover_classification_learner(T1, 8, memoize=False), RCoverReference)
    assert isinstance(rcover_classification_learner(T1, 8, engine="reference"),
                      RCoverReference)
    assert isinstance(make_learner("rcover", T1, 8, epsilon=0.1), RCoverReference)
    with pytest.raises(ConfigurationError):
        rcover_regression_learner(T1, 8, -1.0)
    with pytest.raises(ConfigurationError):
        make_learner("nope", T1, 8)


def test_rcover_members_are_consistent():
    xs, ys = stream(2, 32, 4)
    cls = ProductThreshold(2)
    for L in (RCoverReference(cls, 32, seed=4), RCoverFast(cls, 32, seed=4)):
        for x, y in zip(xs, ys):
            c = L.commit()
            assert cls.member(c.member()) is not None
            L.observe(x, Absolute(y))


def test_every_node_has_the_hedging_expert():
    xs, ys = stream(1, 32, 2)
    L = RCoverReference(T1, 32, seed=2)
    play(L, xs, ys)
    for n in L.table.values():
        if n.experts is not None and n.state is not None:
            assert n.state.K == len(n.experts) + 1


@pytest.mark.parametrize("engine", ["reference", "fast"])
def test_node_count_bound(engine):
    T = 128
    xs, ys = stream(1, T, 5, grid=64)
    L = (RCoverReference(T1, T, seed=5) if engine == "reference" else RCoverFast(T1, T, seed=5))
    play(L, xs, ys)
    for (p, start), count in L.node_counts().items():
        assert count <= sauer_bound(start, 1) + 1, (p, start, count)


def test_regression_scale_changes_nothing_on_repeats():
    # a positive scale over a binary class still yields a working learner
    xs, ys = stream(1, 16, 0)
    out = play(rcover_regression_learner(T1, 16, 0.25, seed=0), xs, ys)
    assert set(out) <= {0, 1}
