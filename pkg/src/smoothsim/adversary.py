"""Smooth adversaries on finitely supported distributions, with certificates.

An adversary exposes, each round, the distribution mu_t it samples from, a
certificate that mu_t is sigma-smooth with respect to its declared base
measure, the drawn instance, and the loss.  All distributions are atomic, so
density ratios are exact up to float division (or exact with rational
probabilities).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, SmoothnessViolation
from .model import (Absolute, Cut, Instance, ProductThreshold, Squared, Threshold1D,
                    anchor, evaluate)

CERT_TOL = 1e-9


class DiscreteDistribution:
    """Finitely supported distribution over instances."""

    __slots__ = ("atoms", "_mass", "_cum")

    def __init__(self, atoms):
        merged: dict = {}
        for x, p in (atoms.items() if isinstance(atoms, dict) else atoms):
            if p < 0:
                raise ConfigurationError(f"negative mass {p} at {x}")
            if p == 0:
                continue
            merged[x] = merged.get(x, 0) + p
        if not merged:
            raise ConfigurationError("empty distribution")
        total = sum(merged.values())
        if abs(float(total) - 1.0) > 1e-12:
            raise ConfigurationError(f"masses sum to {float(total)!r}, not 1")
        self.atoms = tuple(merged.items())
        self._mass = merged
        self._cum = np.cumsum([float(p) for _, p in self.atoms])

    @classmethod
    def uniform(cls, points: Sequence, exact: bool = False):
        w = Fraction(1, len(points)) if exact else 1.0 / len(points)
        return cls([(x, w) for x in points])

    @classmethod
    def point(cls, x):
        return cls([(x, 1)])

    @classmethod
    def mixture(cls, weights: Sequence, dists: Sequence):
        out: dict = {}
        for w, dist in zip(weights, dists):
            for x, p in dist.atoms:
                out[x] = out.get(x, 0) + w * p
        return cls(out)

    @property
    def support(self):
        return [x for x, _ in self.atoms]

    def mass(self, x):
        return self._mass.get(x, 0)

    def sample(self, u: float) -> Instance:
        i = int(np.searchsorted(self._cum, u * self._cum[-1], side="right"))
        return self.atoms[min(i, len(self.atoms) - 1)][0]

    def __len__(self):
        return len(self.atoms)

    def __repr__(self):
        return f"DiscreteDistribution({len(self.atoms)} atoms)"


@dataclass(frozen=True)
class SmoothnessCertificate:
    ratio: float
    sigma: float
    passed: bool


def smoothness_certificate(mu_t: DiscreteDistribution, mu: DiscreteDistribution,
                           sigma) -> SmoothnessCertificate:
    """max over atoms of mu_t of mu_t(x)/mu(x); passes iff <= 1/sigma + 1e-9."""
    ratio = 0
    for x, p in mu_t.atoms:
        m = mu.mass(x)
        if m == 0:
            return SmoothnessCertificate(math.inf, float(sigma), False)
        ratio = max(ratio, p / m)
    limit = 1 / sigma
    return SmoothnessCertificate(ratio, float(sigma), bool(ratio <= limit + CERT_TOL))


# --------------------------------------------------------------------------
# labelers


class Labeler:
    """Labels from a class member f*, flipped with probability ``noise``."""

    def __init__(self, cls, member, noise: float = 0.0, loss: str = "absolute"):
        self.cls = cls
        self.member = cls.member(member)
        self.noise = float(noise)
        self.loss = {"absolute": Absolute, "squared": Squared}[loss]

    def __call__(self, x, rng) -> float:
        y = evaluate(self.cls, self.member, x)
        if self.noise > 0 and rng.random() < self.noise:
            y = 1 - y
        return y


# --------------------------------------------------------------------------
# adversaries


class Adversary:
    """Base protocol: ``distribution`` -> ``draw`` -> ``respond`` each round."""

    kind = "adversary"
    sigma: float = 1.0
    base: DiscreteDistribution
    fstar = None
    cls = None

    def __init__(self, rng):
        self.rng = rng
        self.t = 0
        self._mu = None
        self._cert = None
        self._cert_for = None
        self.all_passed = True
        self.max_ratio = 0.0

    def _mu_t(self, t) -> DiscreteDistribution:
        raise NotImplementedError

    def distribution(self, t: int) -> DiscreteDistribution:
        self.t = t
        self._mu = self._mu_t(t)
        return self._mu

    def certificate(self) -> SmoothnessCertificate:
        if self._cert_for is not self._mu:
            self._cert = smoothness_certificate(self._mu, self.base, self.sigma)
            self._cert_for = self._mu
            self.all_passed &= self._cert.passed
            self.max_ratio = max(self.max_ratio, float(self._cert.ratio))
        return self._cert

    def draw(self) -> Instance:
        return self._mu.sample(self.rng.random())

    def respond(self, x):
        raise NotImplementedError


class LabeledAdversary(Adversary):
    def __init__(self, rng, labeler: Labeler):
        super().__init__(rng)
        self.labeler = labeler
        self.cls = labeler.cls
        self.fstar = labeler.member

    def respond(self, x):
        y = self.labeler(x, self.rng)
        return self.labeler.loss(y)


class IIDAdversary(LabeledAdversary):
    kind = "iid"

    def __init__(self, mu, labeler, rng, sigma=1.0):
        super().__init__(rng, labeler)
        self.base = mu
        self.sigma = sigma

    def _mu_t(self, t):
        return self.base


def iid_adversary(mu, labeler, rng) -> IIDAdversary:
    return IIDAdversary(mu, labeler, rng)


def _max_regions(sigma) -> int:
    return math.floor(1 / sigma + 1e-12)


class SwitchingAdversary(LabeledAdversary):
    """Plays regions[r] on segment r; switch_times are the last rounds of segments."""

    kind = "switching"

    def __init__(self, sigma, regions, switch_times, labeler, rng, exact=False):
        super().__init__(rng, labeler)
        R = len(regions)
        if R < 1:
            raise ConfigurationError("need at least one region")
        if R > _max_regions(sigma):
            raise SmoothnessViolation(f"{R} regions exceed floor(1/sigma) = {_max_regions(sigma)}")
        if len(switch_times) != R - 1 or list(switch_times) != sorted(switch_times):
            raise ConfigurationError("need R-1 increasing switch times")
        self.sigma = sigma
        self.regions = list(regions)
        self.switch_times = list(switch_times)
        one = Fraction(1) if exact else 1.0
        rest = one - R * sigma
        w = [sigma + rest / R] * R
        self.base = DiscreteDistribution.mixture(w, self.regions)

    def segment(self, t) -> int:
        return sum(t > s for s in self.switch_times)

    def _mu_t(self, t):
        return self.regions[self.segment(t)]


def switching_adversary(sigma, regions, switch_times, labeler, rng, exact=False):
    return SwitchingAdversary(sigma, regions, switch_times, labeler, rng, exact)


def mixture_budget(sigma, q, all_corrupted: bool = True) -> int:
    """Largest number of corrupted epochs keeping every mu_k sigma-smooth."""
    if q <= 0:
        return 0
    a = sigma * (1 - q) if all_corrupted else sigma
    return math.floor((1 - a) / (q * sigma) + 1e-12)


class MixtureAdversary(LabeledAdversary):
    """mu_k = q nu_k + (1-q) mu_0 on epoch k; plain mu_0 on epochs without nu_k.

    The declared base measure is a mu_0 + (1-a) (1/M) sum_j nu_j with
    a = sigma (1-q) when every epoch is corrupted (a = sigma otherwise), which
    makes every mu_k sigma-smooth as long as M <= (1-a)/(q sigma).
    """

    kind = "mixture"

    def __init__(self, sigma, q, mu0, fresh, boundaries, labeler, rng):
        super().__init__(rng, labeler)
        if not 0 <= q <= 1:
            raise ConfigurationError("q must lie in [0, 1]")
        self.sigma, self.q, self.mu0 = sigma, q, mu0
        self.fresh = list(fresh)
        self.boundaries = list(boundaries)
        n_epochs = len(self.boundaries) - 1
        M = len(self.fresh)
        if M > n_epochs:
            raise ConfigurationError("more fresh supports than epochs")
        if q == 0 or M == 0:
            self.base = mu0
            self.epoch_mu = [mu0] * n_epochs
            return
        every = M == n_epochs
        if M > mixture_budget(sigma, q, every):
            raise SmoothnessViolation(
                f"{M} corrupted epochs exceed the budget {mixture_budget(sigma, q, every)}")
        a = sigma * (1 - q) if every else sigma
        if q == 1:
            a = 0 * sigma
        self.base = DiscreteDistribution.mixture([a] + [(1 - a) / M] * M, [mu0] + self.fresh)
        self.epoch_mu = [
            DiscreteDistribution.mixture([q, 1 - q], [self.fresh[k], mu0]) if q < 1
            else self.fresh[k] for k in range(M)] + [mu0] * (n_epochs - M)

    def epoch(self, t) -> int:
        lo, hi = 0, len(self.boundaries) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.boundaries[mid] < t:
                lo = mid
            else:
                hi = mid
        return lo

    def _mu_t(self, t):
        return self.epoch_mu[self.epoch(t)]


def mixture_adversary(sigma, q, mu0, fresh, boundaries, labeler, rng):
    return MixtureAdversary(sigma, q, mu0, fresh, boundaries, labeler, rng)


def bisection_mixture(d: int, sigma, T: int, rng, q=None, noise: float = 0.0,
                      loss: str = "absolute", exact: bool = False) -> MixtureAdversary:
    """Mixture adversary whose fresh atoms bisect toward a hidden threshold.

    mu_0 is uniform on the 2d endpoints {(k,0), (k,1)}.  Every epoch gets one
    fresh atom: the midpoint of the current uncertainty interval of
    coordinate (j mod d) + 1, the interval then halves toward theta*.  The
    number of epochs is the smoothness budget (capped at T), with q = 1/sqrt(T)
    by default.
    """
    q = 1 / math.sqrt(T) if q is None else q
    M = max(1, min(T, mixture_budget(sigma, q, True)))
    boundaries = [k * T // M for k in range(M + 1)]
    ends = [Instance(k, Fraction(e)) for k in range(1, d + 1) for e in (0, 1)]
    mu0 = DiscreteDistribution.uniform(ends, exact=exact)
    lo = [Fraction(0)] * d
    hi = [Fraction(1)] * d
    fresh = []
    for j in range(M):
        k = j % d
        mid = (lo[k] + hi[k]) / 2
        fresh.append(DiscreteDistribution.point(Instance(k + 1, mid)))
        if rng.random() < 0.5:
            hi[k] = mid
        else:
            lo[k] = mid
    theta = tuple(Cut((a + b) / 2) for a, b in zip(lo, hi))
    cls = Threshold1D() if d == 1 else ProductThreshold(d)
    labeler = Labeler(cls, theta, noise=noise, loss=loss)
    return MixtureAdversary(sigma, q, mu0, fresh, boundaries, labeler, rng)


def exact_sqrt(v: Fraction):
    """sqrt of a non-negative Fraction: exact when it is a rational square."""
    n, dnm = v.numerator, v.denominator
    rn, rd = math.isqrt(n), math.isqrt(dnm)
    if rn * rn == n and rd * rd == dnm:
        return Fraction(rn, rd)
    return math.sqrt(v)


class LowerBoundAdversary(Adversary):
    """The bisection lower-bound machine on d copies of thresholds.

    Rounds put mass q/d on the midpoint of each coordinate's interval (while
    that coordinate has unused bits) and the rest on the anchor (1, 0).  A hit
    on a midpoint is labeled with the coordinate's next fresh bit and halves
    the interval toward it; the anchor is always labeled 0.
    """

    kind = "lowerbound"

    def __init__(self, d: int, sigma, T: int, rng, exact: bool = False):
        super().__init__(rng)
        if not 0 < sigma < 1:
            raise ConfigurationError("sigma must lie in (0, 1)")
        if d < 1 or T < 1:
            raise ConfigurationError("need d >= 1 and T >= 1")
        self.d, self.T = d, T
        s = Fraction(sigma).limit_denominator(10**9) if exact else float(sigma)
        self.sigma = s
        self.exact = exact
        # small horizons use the machine built for T0 = ceil(4d(1-s)/s)
        self.small = not T > 4 * d * (1 - s) / s
        T_machine = math.ceil(4 * d * (1 - s) / s) if self.small else T
        ratio = Fraction(d) * (1 - s) / (s * T_machine) if exact else d * (1 - s) / (s * T_machine)
        self.q = exact_sqrt(Fraction(ratio)) if exact else math.sqrt(ratio)
        self.N = math.floor(self.q * T_machine / d)
        self.cls = ProductThreshold(d)
        self.anchor = anchor()
        self.bits = (rng.random((d, self.N)) < 0.5).astype(np.int8)
        self.a = [Fraction(0)] * d
        self.b = [Fraction(1)] * d
        self.i = [1] * d
        self.used = np.zeros((d, self.N), dtype=bool)
        # the midpoints visited along each coordinate's bit path
        self.path = []
        for k in range(d):
            a, b, pts = Fraction(0), Fraction(1), []
            for j in range(self.N):
                m = (a + b) / 2
                pts.append(Instance(k + 1, m))
                a, b = (a, m) if self.bits[k, j] == 1 else (m, b)
            self.path.append(pts)
        if self.N == 0:
            self.base = DiscreteDistribution.point(self.anchor)
        else:
            one = Fraction(1) if exact else 1.0
            w = (one - s) / (d * self.N)
            atoms = [(self.anchor, s)] + [(x, w) for pts in self.path for x in pts]
            self.base = DiscreteDistribution(atoms)
        self.fstar = self._theta()
        self._dirty = True

    def _theta(self) -> tuple:
        cuts = []
        for k in range(self.d):
            th = Fraction(1, 2 ** (self.T + 1))
            for j in range(self.N):
                th += Fraction(1 - int(self.bits[k, j]), 2 ** (j + 1))
            cuts.append(Cut(th))
        return tuple(cuts)

    def interval(self, k: int) -> tuple:
        return self.a[k], self.b[k]

    def _mu_t(self, t):
        if not self._dirty:
            return self._mu
        one = Fraction(1) if self.exact else 1.0
        share = self.q / self.d
        atoms = [(self.anchor, one - self.q)]
        for k in range(self.d):
            if self.i[k] <= self.N:
                atoms.append((Instance(k + 1, (self.a[k] + self.b[k]) / 2), share))
            else:
                atoms.append((self.anchor, share))
        self._dirty = False
        return DiscreteDistribution(atoms)

    def respond(self, x):
        if x == self.anchor:
            return Absolute(0)
        k = x.coordinate - 1
        j = self.i[k]
        if j > self.N or x.position != (self.a[k] + self.b[k]) / 2:
            raise SmoothnessViolation(f"{x} is not in the support of mu_t")
        if self.used[k, j - 1]:
            raise RuntimeError("bit consumed twice")
        self.used[k, j - 1] = True
        y = int(self.bits[k, j - 1])
        mid = x.position
        if y == 1:
            self.b[k] = mid
        else:
            self.a[k] = mid
        self.i[k] += 1
        self._dirty = True
        return Absolute(y)

    def bound(self) -> float:
        """min((1/12) sqrt(d T (1-sigma)/sigma), T/24)."""
        s = float(self.sigma)
        return min(math.sqrt(self.d * self.T * (1 - s) / s) / 12, self.T / 24)


def lowerbound_adversary(d, sigma, T, rng, exact=False) -> LowerBoundAdversary:
    return LowerBoundAdversary(d, sigma, T, rng, exact)


def lowerbound_value(d: int, sigma: float, T: int) -> float:
    return min(math.sqrt(d * T * (1 - sigma) / sigma) / 12, T / 24)
