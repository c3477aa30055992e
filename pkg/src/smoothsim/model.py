"""Hypothesis classes, instances, losses, version spaces and covers.

Threshold classes evaluate 1[x >= theta] on each coordinate.  A version space
of a threshold class is a product of parameter cells ``(lo, hi]`` where
``lo is None`` means the cell is closed at 0 (``0 <= theta``).  Because a cell
that is open on the left has no smallest element, members are written as
:class:`Cut` values: ``Cut(z, open=True)`` is the threshold just above ``z``,
i.e. the function 1[x > z].  With this convention every version space has an
attained lexicographically smallest member.

Positions may be floats or :class:`fractions.Fraction`; comparisons between
them are exact.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DimensionError", "InfeasibleError", "Instance", "Cut", "FunctionClassSpec",
    "Threshold1D", "ProductThreshold", "FiniteClass", "LossSpec", "Absolute",
    "Squared", "Tabulated", "Labeling", "ThresholdSpace", "FiniteSpace",
    "evaluate", "full_space", "restrict", "canonical", "unanimous", "split",
    "enumerate_labelings", "sauer_bound", "epsilon_cover", "best_in_hindsight",
    "HindsightOracle", "vc_dimension", "anchor",
]


class DimensionError(ValueError):
    """Member or instance does not fit the class."""


class InfeasibleError(ValueError):
    """A restriction produced an empty version space."""


# --------------------------------------------------------------------------
# instances and members


@dataclass(frozen=True)
class Instance:
    """A point (k, x) of [d] x [0, 1]."""

    coordinate: int = 1
    position: Real = 0.0
    is_anchor: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.position <= 1:
            raise DimensionError(f"position {self.position!r} outside [0, 1]")
        if self.coordinate < 1:
            raise DimensionError(f"coordinate {self.coordinate} < 1")
        if self.is_anchor and (self.coordinate, self.position) != (1, 0):
            raise DimensionError("the anchor sits at (1, 0)")


def anchor() -> Instance:
    return Instance(1, Fraction(0), is_anchor=True)


def as_instance(x) -> Instance:
    if isinstance(x, Instance):
        return x
    if isinstance(x, tuple) and len(x) == 2:
        return Instance(int(x[0]), x[1])
    return Instance(1, x)


@dataclass(frozen=True)
class Cut:
    """Threshold parameter.  Closed cuts give 1[x >= at], open cuts 1[x > at]."""

    at: Real
    open: bool = False

    def __call__(self, x) -> int:
        return int(x > self.at) if self.open else int(x >= self.at)

    def __float__(self):
        return float(self.at)

    def sort_key(self):
        return (self.at, self.open)


def _as_cut(c) -> Cut:
    return c if isinstance(c, Cut) else Cut(c)


# --------------------------------------------------------------------------
# function classes


class FunctionClassSpec:
    """Base of the class descriptions; see the three concrete kinds below."""

    kind: str = ""
    d: int = 1
    binary: bool = True

    def member(self, m):
        raise NotImplementedError


@dataclass(frozen=True)
class Threshold1D(FunctionClassSpec):
    kind = "threshold"
    d = 1
    binary = True

    def member(self, m) -> tuple:
        if isinstance(m, (tuple, list)):
            if len(m) != 1:
                raise DimensionError("Threshold1D member has one coordinate")
            m = m[0]
        c = _as_cut(m)
        if not 0 <= c.at <= 1 or (c.open and c.at >= 1):
            raise DimensionError(f"threshold {c} outside [0, 1]")
        return (c,)


@dataclass(frozen=True)
class ProductThreshold(FunctionClassSpec):
    """f_theta(k, x) = 1[x >= theta_k] on [d] x [0, 1]."""

    d: int = 1
    kind = "product"
    binary = True

    def __post_init__(self):
        if self.d < 1:
            raise DimensionError("d must be >= 1")

    def member(self, m) -> tuple:
        if isinstance(m, (Real, Cut)):
            m = (m,)
        m = tuple(_as_cut(c) for c in m)
        if len(m) != self.d:
            raise DimensionError(f"expected {self.d} thresholds, got {len(m)}")
        for c in m:
            if not 0 <= c.at <= 1 or (c.open and c.at >= 1):
                raise DimensionError(f"threshold {c} outside [0, 1]")
        return m


class FiniteClass(FunctionClassSpec):
    """Finite class tabulated on a finite universe of instances.

    ``values[i, j]`` is member i evaluated at ``universe[j]``.
    """

    kind = "finite"

    def __init__(self, values, universe: Sequence):
        values = np.asarray(values, dtype=float)
        if values.ndim != 2 or values.shape[0] < 1:
            raise DimensionError("need a (M, U) table with M >= 1")
        universe = tuple(as_instance(u) for u in universe)
        if len(universe) != values.shape[1]:
            raise DimensionError("table width does not match the universe")
        if values.min(initial=0) < 0 or values.max(initial=0) > 1:
            raise DimensionError("values must lie in [0, 1]")
        self.values = values
        self.values.setflags(write=False)
        self.universe = universe
        self.column = {u: j for j, u in enumerate(universe)}
        if len(self.column) != len(universe):
            raise DimensionError("universe instances must be distinct")
        self.d = max((u.coordinate for u in universe), default=1)
        self.binary = bool(np.isin(values, (0.0, 1.0)).all())

    @classmethod
    def from_functions(cls, functions: Iterable, universe: Sequence):
        universe = [as_instance(u) for u in universe]
        table = [[f(u) for u in universe] for f in functions]
        return cls(table, universe)

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def member(self, m) -> int:
        m = int(m)
        if not 0 <= m < self.size:
            raise DimensionError(f"member id {m} outside [0, {self.size})")
        return m

    def col(self, x: Instance) -> int:
        try:
            return self.column[x]
        except KeyError:
            raise DimensionError(f"{x} is not in the tabulated universe") from None

    def __repr__(self):
        return f"FiniteClass(M={self.size}, U={len(self.universe)})"


def vc_dimension(cls: FunctionClassSpec) -> int:
    """VC dimension (Finite classes: brute force over universe subsets)."""
    if cls.kind in ("threshold", "product"):
        return cls.d
    rows = {tuple(r) for r in cls.values}
    n = len(cls.universe)
    best = 0
    for size in range(1, n + 1):
        if 2**size > len(rows):
            break
        found = False
        for idx in itertools.combinations(range(n), size):
            if len({tuple(r[i] for i in idx) for r in rows}) == 2**size:
                found = True
                break
        if not found:
            break
        best = size
    return best


def evaluate(cls: FunctionClassSpec, member, x) -> float:
    """Value of a class member at an instance."""
    x = as_instance(x)
    if cls.kind == "finite":
        return float(cls.values[cls.member(member), cls.col(x)])
    m = cls.member(member)
    if x.coordinate > cls.d:
        raise DimensionError(f"coordinate {x.coordinate} > d = {cls.d}")
    return m[x.coordinate - 1](x.position)


# --------------------------------------------------------------------------
# losses


@dataclass(frozen=True)
class LossSpec:
    """A 1-Lipschitz loss on [0, 1] with values in [0, 1]."""

    kind: str
    label: Real | None = None
    grid: tuple | None = None

    def __post_init__(self):
        if self.kind in ("absolute", "squared"):
            if self.label is None or not 0 <= self.label <= 1:
                raise ValueError("label must lie in [0, 1]")
        elif self.kind == "tabulated":
            g = np.asarray(self.grid, dtype=float)
            if g.ndim != 1 or g.size < 2:
                raise ValueError("tabulated loss needs at least two grid values")
            if g.min() < 0 or g.max() > 1:
                raise ValueError("tabulated loss values must lie in [0, 1]")
            h = 1.0 / (g.size - 1)
            if np.abs(np.diff(g)).max() > h + 1e-12:
                raise ValueError("tabulated loss is not 1-Lipschitz")
        else:
            raise ValueError(f"unknown loss kind {self.kind!r}")

    def __call__(self, a):
        if self.kind == "absolute":
            if isinstance(a, np.ndarray):
                return np.abs(a - float(self.label))
            return abs(float(a) - float(self.label))
        if self.kind == "squared":
            if isinstance(a, np.ndarray):
                return 0.5 * (a - float(self.label)) ** 2
            return 0.5 * (float(a) - float(self.label)) ** 2
        g = np.asarray(self.grid, dtype=float)
        out = np.interp(a, np.linspace(0.0, 1.0, g.size), g)
        return out if isinstance(a, np.ndarray) else float(out)


def Absolute(y) -> LossSpec:
    return LossSpec("absolute", y)


def Squared(y) -> LossSpec:
    """Half squared loss, which keeps the Lipschitz constant at 1."""
    return LossSpec("squared", y)


def Tabulated(values) -> LossSpec:
    return LossSpec("tabulated", grid=tuple(float(v) for v in values))


# --------------------------------------------------------------------------
# labelings and version spaces


@dataclass(frozen=True)
class Labeling:
    points: tuple
    labels: tuple

    def __post_init__(self):
        if len(self.points) != len(self.labels):
            raise DimensionError("points and labels differ in length")


@dataclass(frozen=True)
class ThresholdSpace:
    """Product of parameter cells (lo_k, hi_k]; lo_k None means [0, hi_k]."""

    cls: FunctionClassSpec
    lo: tuple
    hi: tuple
    eps: float = 0.0

    def key(self):
        return (self.lo, self.hi)

    def contains(self, member) -> bool:
        for c, lo, hi in zip(self.cls.member(member), self.lo, self.hi):
            if c.at > hi or (c.at == hi and c.open):
                return False
            if lo is not None and (c.at < lo or (c.at == lo and not c.open)):
                return False
        return True


@dataclass(frozen=True)
class FiniteSpace:
    """Explicit sorted member subset of a finite class."""

    cls: FiniteClass
    members: tuple
    eps: float = 0.0

    def key(self):
        return self.members

    def contains(self, member) -> bool:
        return int(member) in set(self.members)


def full_space(cls: FunctionClassSpec, eps: float = 0.0):
    if cls.kind == "finite":
        return FiniteSpace(cls, tuple(range(cls.size)), eps)
    return ThresholdSpace(cls, (None,) * cls.d, (Fraction(1),) * cls.d, eps)


def _cell_label(lo, hi, z):
    """Common label of the cell members at position z, or None if split."""
    if z >= hi:
        return 1
    if lo is not None and z <= lo:
        return 0
    return None


def canonical(vs):
    """Lexicographically smallest member (lowest theta per coordinate)."""
    if isinstance(vs, FiniteSpace):
        return vs.members[0]
    return tuple(Cut(0) if lo is None else Cut(lo, open=True) for lo in vs.lo)


def unanimous(vs, x):
    """The value every member of vs takes at x, or None if they differ."""
    x = as_instance(x)
    if isinstance(vs, FiniteSpace):
        col = vs.cls.values[list(vs.members), vs.cls.col(x)]
        return float(col[0]) if (col == col[0]).all() else None
    if x.coordinate > vs.cls.d:
        raise DimensionError(f"coordinate {x.coordinate} > d = {vs.cls.d}")
    k = x.coordinate - 1
    return _cell_label(vs.lo[k], vs.hi[k], x.position)


def _restrict_labels(vs, points, labels):
    points = [as_instance(p) for p in points]
    if isinstance(vs, FiniteSpace):
        keep = []
        for m in vs.members:
            row = vs.cls.values[m]
            if all(row[vs.cls.col(p)] == y for p, y in zip(points, labels)):
                keep.append(m)
        if not keep:
            raise InfeasibleError("no member is consistent with the labels")
        return FiniteSpace(vs.cls, tuple(keep), vs.eps)
    lo, hi = list(vs.lo), list(vs.hi)
    for p, y in zip(points, labels):
        if p.coordinate > vs.cls.d:
            raise DimensionError(f"coordinate {p.coordinate} > d = {vs.cls.d}")
        k, z = p.coordinate - 1, p.position
        if y == 1:
            hi[k] = min(hi[k], z)
        elif y == 0:
            lo[k] = z if lo[k] is None else max(lo[k], z)
        else:
            raise InfeasibleError(f"threshold classes are binary, got label {y}")
    for a, b in zip(lo, hi):
        if a is not None and a >= b:
            raise InfeasibleError("labels are not realizable in this space")
    return ThresholdSpace(vs.cls, tuple(lo), tuple(hi), vs.eps)


def restrict(vs, constraint):
    """Intersect vs with a labeled dataset or with a ball B_{f0}(eps) on points.

    ``constraint`` is either a :class:`Labeling` or a tuple
    ``(f0, points, eps)``; the ball keeps members with
    max_i |f(x_i) - f0(x_i)| <= eps.
    """
    if isinstance(constraint, Labeling):
        return _restrict_labels(vs, constraint.points, constraint.labels)
    f0, points, eps = constraint
    points = [as_instance(p) for p in points]
    if isinstance(vs, FiniteSpace):
        table = vs.cls.values
        cols = [vs.cls.col(p) for p in points]
        ref = table[f0, cols]
        keep = tuple(m for m in vs.members
                     if not cols or np.abs(table[m, cols] - ref).max() <= eps)
        if not keep:
            raise InfeasibleError("ball contains no member of the space")
        return FiniteSpace(vs.cls, keep, vs.eps)
    if eps >= 1:
        return vs
    labels = [evaluate(vs.cls, f0, p) for p in points]
    return _restrict_labels(vs, points, labels)


def split(vs, points: Sequence) -> list:
    """Partition vs by the labelings it realizes on points.

    Returns ``[(Labeling, sub_space), ...]`` in canonical order: sub-spaces
    sorted by their smallest member.
    """
    points = tuple(as_instance(p) for p in points)
    if isinstance(vs, FiniteSpace):
        groups: dict = {}
        cols = [vs.cls.col(p) for p in points]
        for m in vs.members:
            groups.setdefault(tuple(vs.cls.values[m, cols]), []).append(m)
        out = [(Labeling(points, lab), FiniteSpace(vs.cls, tuple(ms), vs.eps))
               for lab, ms in groups.items()]
        out.sort(key=lambda item: item[1].members[0])
        return out
    d = vs.cls.d
    per_coord = []
    for k in range(d):
        lo, hi = vs.lo[k], vs.hi[k]
        zs = sorted({p.position for p in points if p.coordinate == k + 1
                     and _cell_label(lo, hi, p.position) is None})
        bounds = [lo] + zs + [hi]
        per_coord.append([(bounds[j], bounds[j + 1]) for j in range(len(zs) + 1)])
    out = []
    for cells in itertools.product(*per_coord):
        sub = ThresholdSpace(vs.cls, tuple(c[0] for c in cells),
                             tuple(c[1] for c in cells), vs.eps)
        labels = tuple(_cell_label(*cells[p.coordinate - 1], p.position)
                       for p in points)
        out.append((Labeling(points, labels), sub))
    return out


def enumerate_labelings(cls_or_vs, points: Sequence) -> set:
    """Distinct label vectors the class (or version space) realizes on points."""
    vs = cls_or_vs
    if isinstance(vs, FunctionClassSpec):
        vs = full_space(vs)
    return {lab for lab, _ in split(vs, points)}


def sauer_bound(n: int, d: int) -> int:
    """Sum_{i <= min(d, n)} C(n, i)."""
    if n < 0 or d < 0:
        raise ValueError("n and d must be non-negative")
    return sum(math.comb(n, i) for i in range(min(d, n) + 1))


def epsilon_cover(vs, points: Sequence, eps: float) -> list:
    """Members of vs forming an eps-cover of vs in sup-norm over points."""
    points = [as_instance(p) for p in points]
    if isinstance(vs, FiniteSpace):
        cols = [vs.cls.col(p) for p in points]
        reps: list = []
        rows: list = []
        for m in vs.members:
            row = vs.cls.values[m, cols]
            if not any(np.abs(row - r).max(initial=0.0) <= eps for r in rows):
                reps.append(m)
                rows.append(row)
        return reps
    if eps >= 1:
        return [canonical(vs)]
    return [canonical(sub) for _, sub in split(vs, points)]


# --------------------------------------------------------------------------
# best in hindsight


def _gap_scan(zs, l0, l1):
    """Best gap for sorted distinct positions with aggregated losses.

    Gap j puts the threshold in (z_j, z_{j+1}]: the first j points get label 0
    and the rest label 1.  Returns (j, loss) with ties to the smallest j.
    """
    m = len(zs)
    if m == 0:
        return 0, 0.0
    c0 = np.concatenate(([0.0], np.cumsum(l0)))
    c1 = np.concatenate(([0.0], np.cumsum(l1)))
    losses = c0 + (c1[-1] - c1)
    if zs[-1] >= 1:
        losses = losses[:-1]  # theta > 1 is not a member
    j = int(np.argmin(losses))
    return j, float(losses[j])


class HindsightOracle:
    """Incremental exact best-in-hindsight for threshold and finite classes."""

    def __init__(self, cls: FunctionClassSpec):
        self.cls = cls
        if cls.kind == "finite":
            self.totals = np.zeros(cls.size)
        else:
            self.pos = [[] for _ in range(cls.d)]
            self.l0 = [np.zeros(0) for _ in range(cls.d)]
            self.l1 = [np.zeros(0) for _ in range(cls.d)]

    def add(self, x, loss: LossSpec):
        x = as_instance(x)
        if self.cls.kind == "finite":
            self.totals += loss(self.cls.values[:, self.cls.col(x)])
            return
        if x.coordinate > self.cls.d:
            raise DimensionError(f"coordinate {x.coordinate} > d = {self.cls.d}")
        k = x.coordinate - 1
        zs = self.pos[k]
        i = bisect.bisect_left(zs, x.position)
        a, b = loss(0.0), loss(1.0)
        if i < len(zs) and zs[i] == x.position:
            self.l0[k][i] += a
            self.l1[k][i] += b
        else:
            zs.insert(i, x.position)
            self.l0[k] = np.insert(self.l0[k], i, a)
            self.l1[k] = np.insert(self.l1[k], i, b)

    def best(self):
        """(member, total loss); ties toward the smaller parameter."""
        if self.cls.kind == "finite":
            i = int(np.argmin(self.totals))
            return i, float(self.totals[i])
        member, total = [], 0.0
        for zs, l0, l1 in zip(self.pos, self.l0, self.l1):
            j, loss = _gap_scan(zs, l0, l1)
            member.append(Cut(0) if j == 0 else Cut(zs[j - 1], open=True))
            total += loss
        return tuple(member), total


def best_in_hindsight(cls: FunctionClassSpec, trace: Iterable) -> tuple:
    """Exact minimizer of the cumulative loss over the class.

    The threshold classes only predict 0 or 1, so the loss is piecewise
    constant in each theta_k and the gap scan is exact for every loss kind.
    """
    oracle = HindsightOracle(cls)
    for x, loss in trace:
        oracle.add(x, loss)
    return oracle.best()
