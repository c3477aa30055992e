import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smoothsim.adversary import DiscreteDistribution
from smoothsim.diagnostics import (epoch_sums, epoch_violation_count, gamma_bruteforce,
                                   gamma_exact, gamma_series, gamma_tube_exact,
                                   gaussian_complexity_mc, projection, wills_mc)
from smoothsim.errors import EnumerationError, InfeasibleError
from smoothsim.model import (Cut, FiniteClass, Instance, Labeling, ProductThreshold,
                             Threshold1D, evaluate)

T1 = Threshold1D()
D = DiscreteDistribution


def pts(*zs, k=1):
    return [Instance(k, z) for z in zs]


def labeled(cls, theta, points):
    return [(p, evaluate(cls, cls.member(theta), p)) for p in points]


def random_config(rng, d):
    cls = T1 if d == 1 else ProductThreshold(d)
    grid = 12
    theta = tuple(Fraction(int(v), grid) for v in rng.integers(0, grid + 1, d))
    n = int(rng.integers(0, 7))
    points = [Instance(int(k), Fraction(int(z), grid))
              for k, z in zip(rng.integers(1, d + 1, n), rng.integers(0, grid + 1, n))]
    m = int(rng.integers(1, 6))
    atoms = [Instance(int(k), Fraction(int(z), grid))
             for k, z in zip(rng.integers(1, d + 1, m), rng.integers(0, grid + 1, m))]
    w = rng.dirichlet(np.ones(m))
    return cls, theta, points, D(list(zip(atoms, w)))


def test_gamma_examples():
    mu = D.uniform(pts(0.1, 0.5, 0.9))
    prefix = labeled(T1, 0.5, pts(0.3, 0.7))
    assert gamma_exact(T1, prefix, mu) == pytest.approx(1 / 3)
    assert gamma_exact(T1, [], D.uniform(pts(0.0, 0.2, 0.6))) == pytest.approx(1.0)
    full = labeled(T1, 0.5, pts(0.1, 0.5, 0.9))
    assert gamma_exact(T1, full, mu) == 0
    assert gamma_bruteforce(T1, prefix, mu) == pytest.approx(1 / 3)
    # labels given as a Labeling are accepted too
    lab = Labeling(tuple(pts(0.3, 0.7)), (0, 1))
    assert gamma_exact(T1, lab, mu) == pytest.approx(1 / 3)


def test_gamma_rejects_unrealizable_prefix():
    bad = [(Instance(1, 0.3), 1), (Instance(1, 0.6), 0)]
    with pytest.raises(InfeasibleError):
        gamma_exact(T1, bad, D.point(Instance(1, 0.5)))
    with pytest.raises(InfeasibleError):
        gamma_bruteforce(T1, bad, D.point(Instance(1, 0.5)))


def test_point_at_one_never_separates():
    assert gamma_exact(T1, [], D.point(Instance(1, 1.0))) == 0
    assert gamma_bruteforce(T1, [], D.point(Instance(1, 1.0))) == 0


def test_product_gamma_sums_over_coordinates():
    cls = ProductThreshold(2)
    mu = D.uniform([Instance(1, 0.2), Instance(1, 0.6), Instance(2, 0.4), Instance(2, 0.8)])
    prefix = labeled(cls, (0.5, 0.5), [Instance(1, 0.5)])
    assert gamma_exact(cls, prefix, mu) == pytest.approx(0.75)
    assert gamma_bruteforce(cls, prefix, mu) == pytest.approx(0.75)


def test_bruteforce_trivia():
    U = pts(0.1, 0.2)
    single = FiniteClass(np.array([[0, 1.0]]), U)
    assert gamma_bruteforce(single, [], D.uniform(U)) == 0
    mu = D.uniform(pts(0.1, 0.5, 0.9))
    assert gamma_bruteforce(T1, [], mu, r=2) == gamma_bruteforce(T1, [], mu, r=1)
    with pytest.raises(EnumerationError):
        projection(ProductThreshold(3), [Instance(k, Fraction(i, 30)) for k in (1, 2, 3)
                                         for i in range(30)])


@pytest.mark.parametrize("d", [1, 2, 3])
def test_gamma_exact_matches_bruteforce(d):
    rng = np.random.default_rng(d)
    for _ in range(70):
        cls, theta, points, mu = random_config(rng, d)
        prefix = labeled(cls, theta, points)
        assert abs(gamma_exact(cls, prefix, mu) - gamma_bruteforce(cls, prefix, mu)) <= 1e-12


@pytest.mark.parametrize("eps,r", [(0.0, 1), (0.0, 2), (0.3, 1), (0.6, 2)])
def test_tube_matches_bruteforce(eps, r):
    rng = np.random.default_rng(11)
    for _ in range(60):
        d = int(rng.integers(1, 3))
        cls, theta, points, mu = random_config(rng, d)
        got = gamma_tube_exact(cls, theta, points, mu, eps, r)
        want = gamma_bruteforce(cls, points, mu, r=r, fstar=theta, eps=eps)
        assert abs(got - want) <= 1e-12


def test_tube_example():
    mu = D.uniform(pts(0.1, 0.5, 0.9))
    assert gamma_tube_exact(T1, 0.5, pts(0.3, 0.7), mu) == pytest.approx(1 / 3)


def test_gamma_monotone_in_prefix():
    rng = np.random.default_rng(5)
    for _ in range(50):
        cls, theta, points, mu = random_config(rng, 2)
        vals = [gamma_exact(cls, labeled(cls, theta, points[:i]), mu)
                for i in range(len(points) + 1)]
        assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))


def test_series_and_epochs():
    mus = [D.uniform(pts(0.1, 0.5, 0.9))] * 6
    points = pts(0.1, 0.5, 0.9, 0.1, 0.5, 0.9)
    s = gamma_series(T1, points, mus, [0, 3, 6])
    assert s[:3].tolist() == [1.0] * 3
    assert s[3:].tolist() == [0.0] * 3
    assert epoch_sums(s, [0, 3, 6]) == [3.0, 0.0]
    assert epoch_violation_count(s, [0, 3, 6], 1.0, 1.0) == 1
    assert epoch_violation_count([], [0], 0.5, 1.0) == 0
    tube = gamma_series(T1, points, mus, [0, 3, 6], fstar=0.5)
    assert tube[3:].tolist() == [0.0] * 3


@given(st.lists(st.floats(0, 1), max_size=30), st.floats(0, 1), st.floats(0, 1),
       st.floats(0, 3), st.floats(0, 3))
def test_violation_count_monotone(series, q1, q2, w1, w2):
    T = len(series)
    bounds = list(range(0, T, 4)) + [T] if T else [0]
    lo_q, hi_q = sorted((q1, q2))
    lo_w, hi_w = sorted((w1, w2))
    assert epoch_violation_count(series, bounds, hi_q, lo_w) <= \
        epoch_violation_count(series, bounds, lo_q, lo_w)
    assert epoch_violation_count(series, bounds, lo_q, hi_w) <= \
        epoch_violation_count(series, bounds, lo_q, lo_w)


def test_violation_count_iid_and_switching():
    # iid on a labeled support: gamma vanishes after the warm-up epoch
    grid = pts(0.2, 0.4, 0.6, 0.8)
    mus = [D.uniform(grid)] * 40
    points = (grid * 10)
    bounds = list(range(0, 41, 4))
    s = gamma_series(T1, points, mus, bounds)
    assert epoch_violation_count(s, bounds[1:], 1.0, 1.0) == 0
    # two regions with one switch: at most two epochs stand out
    a, b = D.uniform(pts(0.1, 0.2)), D.point(Instance(1, 0.7))
    mus = [a] * 20 + [b] * 20
    points = (pts(0.1, 0.2) * 10) + pts(0.7) * 20
    s = gamma_series(T1, points, mus, bounds)
    assert epoch_violation_count(s, bounds, 1.0, 0.1) <= 2


def test_wills_singleton_is_exact():
    U = pts(0.1, 0.2, 0.3)
    single = FiniteClass(np.array([[0, 1.0, 1.0]]), U)
    w = wills_mc(single, U, draws=1000, rng=0)
    assert (w.estimate, w.se) == (1.0, 0.0)
    g = gaussian_complexity_mc(single, U, draws=1000, rng=0)
    assert g.estimate == 0 and g.inequality_holds


def test_gaussian_half_normal():
    U = pts(0.5)
    F = FiniteClass(np.array([[0.0], [1.0]]), U)
    g = gaussian_complexity_mc(F, U, draws=100_000, rng=1)
    assert abs(g.estimate - 1 / math.sqrt(2 * math.pi)) <= 3 * g.se


def test_wills_bounds_on_threshold_points():
    U = pts(*np.linspace(0.05, 0.95, 8))
    g = gaussian_complexity_mc(T1, U, draws=50_000, rng=2)
    assert g.wills.m == 8
    assert g.inequality_holds
    assert g.wills.log_estimate <= math.log(9) + 3 * g.wills.log_se


def test_wills_monotone_in_m():
    grid = np.linspace(0.05, 0.95, 16)
    small = wills_mc(T1, pts(*grid[::2]), draws=50_000, rng=3)
    big = wills_mc(T1, pts(*grid), draws=50_000, rng=4)
    assert big.estimate + 3 * math.hypot(small.se, big.se) >= small.estimate


def test_mc_is_seeded():
    U = pts(0.2, 0.5, 0.7)
    a = wills_mc(T1, U, draws=5000, rng=9)
    b = wills_mc(T1, U, draws=5000, rng=9)
    assert a == b
