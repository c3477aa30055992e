import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smoothsim.model import (Absolute, Cut, DimensionError, FiniteClass, InfeasibleError,
                             Instance, Labeling, ProductThreshold, Squared, Tabulated,
                             Threshold1D, anchor, best_in_hindsight, canonical,
                             enumerate_labelings, epsilon_cover, evaluate, full_space,
                             restrict, sauer_bound, split, unanimous, vc_dimension)

T1 = Threshold1D()
positions = st.fractions(min_value=0, max_value=1, max_denominator=16)


def pts(*zs):
    return [Instance(1, z) for z in zs]


# ---------------------------------------------------------------- instances


def test_instance_validation():
    with pytest.raises(DimensionError):
        Instance(1, 1.5)
    with pytest.raises(DimensionError):
        Instance(0, 0.5)
    with pytest.raises(DimensionError):
        Instance(2, 0.0, is_anchor=True)
    a = anchor()
    assert (a.coordinate, a.position, a.is_anchor) == (1, 0, True)
    assert a == Instance(1, 0.0)


# ---------------------------------------------------------------- evaluate


def test_evaluate_examples():
    assert evaluate(T1, 0.5, 0.7) == 1
    assert evaluate(T1, 0.5, 0.5) == 1  # closed at theta
    assert evaluate(T1, 0.5, 0.49) == 0
    assert evaluate(ProductThreshold(2), (0.3, 0.9), (2, 0.5)) == 0
    assert evaluate(ProductThreshold(2), (0.3, 0.9), (1, 0.5)) == 1


def test_evaluate_dimension_errors():
    with pytest.raises(DimensionError):
        evaluate(ProductThreshold(2), (0.3,), (1, 0.5))
    with pytest.raises(DimensionError):
        evaluate(ProductThreshold(2), (0.3, 0.4), (3, 0.5))
    with pytest.raises(DimensionError):
        T1.member(1.5)


def test_open_cut_is_strict():
    assert Cut(0.5, open=True)(0.5) == 0
    assert Cut(0.5, open=True)(0.51) == 1


def test_finite_class_and_vc():
    U = pts(0.1, 0.2, 0.3)
    F = FiniteClass.from_functions([lambda x: 0, lambda x: float(x.position > 0.15)], U)
    assert F.size == 2
    assert evaluate(F, 1, U[1]) == 1.0
    assert vc_dimension(F) == 1
    assert vc_dimension(ProductThreshold(3)) == 3
    with pytest.raises(DimensionError):
        evaluate(F, 0, Instance(1, 0.9))


# ---------------------------------------------------------------- losses


def test_losses():
    assert Absolute(1)(0.25) == 0.75
    assert Squared(0)(1.0) == 0.5
    tab = Tabulated([0.0, 0.5, 1.0])
    assert tab(0.25) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        Tabulated([0.0, 1.0, 0.0, 1.0])  # slope 3
    with pytest.raises(ValueError):
        Absolute(2)


@given(st.floats(0, 1), st.sampled_from(["abs", "sq", "tab"]))
def test_losses_bounded_and_lipschitz(y, kind):
    loss = {"abs": Absolute(y), "sq": Squared(y),
            "tab": Tabulated(np.abs(np.linspace(0, 1, 11) - y))}[kind]
    grid = np.linspace(0, 1, 1001)
    vals = loss(grid)
    assert vals.min() >= 0 and vals.max() <= 1
    assert np.abs(np.diff(vals)).max() <= grid[1] + 1e-12


# ---------------------------------------------------------------- labelings


def test_enumerate_labelings_examples():
    labs = enumerate_labelings(T1, pts(0.2, 0.5, 0.8))
    assert {lab.labels for lab in labs} == {(1, 1, 1), (0, 1, 1), (0, 0, 1), (0, 0, 0)}
    assert len(enumerate_labelings(T1, [])) == 1
    assert len(enumerate_labelings(ProductThreshold(3), [])) == 1
    assert len(enumerate_labelings(T1, pts(0.1, 0.3, 0.5, 0.7, 0.9))) == sauer_bound(5, 1)


def test_sauer_bound_examples():
    assert sauer_bound(5, 1) == 6
    assert sauer_bound(0, 4) == 1
    assert sauer_bound(10, 2) == 56
    assert sauer_bound(3, 5) == 8


def _brute_labelings(d, points):
    """Label vectors over a grid of thresholds dense enough for the points."""
    cands = []
    for k in range(1, d + 1):
        zs = sorted({p.position for p in points if p.coordinate == k})
        cands.append([Cut(0)] + [Cut(z, open=True) for z in zs if z < 1])
    return {tuple(evaluate(ProductThreshold(d), m, p) for p in points)
            for m in itertools.product(*cands)}


@given(st.integers(1, 3), st.lists(st.tuples(st.integers(1, 3), positions), max_size=8))
def test_labelings_match_bruteforce(d, raw):
    points = [Instance(min(k, d), z) for k, z in raw]
    got = {lab.labels for lab in enumerate_labelings(ProductThreshold(d), points)}
    assert got == _brute_labelings(d, points)
    assert len(got) <= sauer_bound(len(points), d)


def test_duplicate_points_are_deduplicated():
    assert len(enumerate_labelings(T1, pts(0.5, 0.5, 0.5))) == 2


def test_labelings_are_monotone_blocks():
    for lab in enumerate_labelings(T1, pts(0.9, 0.1, 0.5)):
        by_pos = [y for _, y in sorted(zip((0.9, 0.1, 0.5), lab.labels))]
        assert by_pos == sorted(by_pos)


# ---------------------------------------------------------------- version spaces


def test_restrict_examples():
    vs = full_space(T1)
    one = restrict(vs, Labeling(tuple(pts(0.5)), (1,)))
    assert (one.lo, one.hi) == ((None,), (0.5,))
    two = restrict(vs, Labeling(tuple(pts(0.5, 0.3)), (1, 0)))
    assert (two.lo, two.hi) == ((0.3,), (0.5,))
    assert restrict(vs, Labeling((), ())) == vs
    assert restrict(two, Labeling(tuple(pts(0.5, 0.3)), (1, 0))) == two  # idempotent
    with pytest.raises(InfeasibleError):
        restrict(vs, Labeling(tuple(pts(0.3, 0.5)), (1, 0)))


def test_restrict_ball():
    vs = full_space(T1)
    b = restrict(vs, ((Cut(0.4),), pts(0.2, 0.6), 0.0))
    assert (b.lo, b.hi) == ((0.2,), (0.6,))
    assert restrict(vs, ((Cut(0.4),), pts(0.2, 0.6), 1.0)) == vs


@given(st.lists(positions, max_size=8), positions)
def test_restrict_reproduces_labels(zs, theta):
    points = pts(*zs)
    labels = tuple(evaluate(T1, theta, p) for p in points)
    vs = restrict(full_space(T1), Labeling(tuple(points), labels))
    assert vs.contains(theta)
    f = canonical(vs)
    assert tuple(evaluate(T1, f, p) for p in points) == labels
    # monotone: a further constraint never enlarges the space
    extra = restrict(vs, Labeling((Instance(1, Fraction(1, 3)),),
                                  (evaluate(T1, theta, Instance(1, Fraction(1, 3))),)))
    assert extra.lo[0] is None or vs.lo[0] is None or extra.lo[0] >= vs.lo[0]
    assert extra.hi[0] <= vs.hi[0]


def test_canonical_and_unanimous():
    vs = full_space(ProductThreshold(2))
    assert canonical(vs) == (Cut(0), Cut(0))
    sub = restrict(vs, Labeling((Instance(1, 0.3), Instance(2, 0.6)), (0, 1)))
    assert canonical(sub) == (Cut(0.3, open=True), Cut(0))
    assert unanimous(sub, Instance(1, 0.2)) == 0
    assert unanimous(sub, Instance(1, 0.5)) is None
    assert unanimous(sub, Instance(2, 0.7)) == 1


def test_split_partitions_space():
    vs = full_space(ProductThreshold(2))
    parts = split(vs, [Instance(1, 0.5), Instance(2, 0.2), Instance(2, 0.7)])
    assert len(parts) == 2 * 3
    for lab, sub in parts:
        f = canonical(sub)
        assert tuple(evaluate(vs.cls, f, p) for p in lab.points) == lab.labels


def test_epsilon_cover_examples():
    vs = full_space(T1)
    cover = epsilon_cover(vs, pts(0.2, 0.5, 0.8), 0.0)
    assert len(cover) == 4
    labs = {tuple(evaluate(T1, f, p) for p in pts(0.2, 0.5, 0.8)) for f in cover}
    assert labs == {lab.labels for lab in enumerate_labelings(T1, pts(0.2, 0.5, 0.8))}
    assert len(epsilon_cover(vs, [], 0.0)) == 1
    U = pts(0.1, 0.2, 0.3)
    F = FiniteClass(np.array([[0, 0, 1], [0, 1, 1], [0, 0, 1], [1, 1, 1.0]]), U)
    assert len(epsilon_cover(full_space(F), U, 0.0)) == 3 <= F.size


@given(st.lists(st.tuples(st.integers(1, 2), positions), max_size=10))
def test_zero_cover_hits_every_labeling(raw):
    cls = ProductThreshold(2)
    points = [Instance(k, z) for k, z in raw]
    cover = epsilon_cover(full_space(cls), points, 0.0)
    labs = {tuple(evaluate(cls, f, p) for p in points) for f in cover}
    assert labs == _brute_labelings(2, points)


# ---------------------------------------------------------------- best in hindsight


def test_best_in_hindsight_examples():
    m, loss = best_in_hindsight(T1, [(Instance(1, 0.4), Absolute(1)),
                                     (Instance(1, 0.6), Absolute(1))])
    assert loss == 0 and m == (Cut(0),)
    m, loss = best_in_hindsight(T1, [])
    assert loss == 0 and m == (Cut(0),)
    _, loss = best_in_hindsight(T1, [(Instance(1, 0.5), Absolute(1)),
                                     (Instance(1, 0.5), Absolute(0))])
    assert loss == 1


@given(st.lists(st.tuples(st.floats(0, 1), st.integers(0, 1)), max_size=50))
def test_best_in_hindsight_matches_grid(trace):
    trace = [(Instance(1, z), Absolute(y)) for z, y in trace]
    _, best = best_in_hindsight(T1, trace)
    grid = np.linspace(0, 1, 10_001)
    xs = np.array([x.position for x, _ in trace])
    ys = np.array([loss.label for _, loss in trace])
    if len(trace) == 0:
        assert best == 0
        return
    preds = (xs[None, :] >= grid[:, None]).astype(float)
    grid_best = np.abs(preds - ys[None, :]).sum(axis=1).min()
    # the exact optimum is never worse than the grid and the grid can only miss
    # optima whose cell is thinner than the resolution
    assert best <= grid_best + 1e-12
    gaps = np.diff(np.unique(np.concatenate(([0.0, 1.0], xs))))
    if gaps.size and gaps.min() > 2e-4:
        assert best == pytest.approx(grid_best)


def test_best_in_hindsight_products_and_finite():
    cls = ProductThreshold(2)
    trace = [(Instance(1, 0.3), Absolute(0)), (Instance(2, 0.6), Absolute(1)),
             (Instance(1, 0.7), Absolute(1))]
    m, loss = best_in_hindsight(cls, trace)
    assert loss == 0
    assert m == (Cut(0.3, open=True), Cut(0))
    U = pts(0.1, 0.2)
    F = FiniteClass(np.array([[0, 1], [1, 1.0]]), U)
    assert best_in_hindsight(F, [(U[0], Absolute(1)), (U[1], Absolute(1))]) == (1, 0.0)
