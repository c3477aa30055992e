"""Epoch arithmetic for the recursive and the flat epoch schemes."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import ConfigurationError


def default_depth(T: int) -> int:
    """floor(log2 T), computed exactly."""
    if T < 1:
        raise ConfigurationError("T must be >= 1")
    return int(T).bit_length() - 1


def split_point(t0: int, t1: int) -> int:
    return (t0 + t1) // 2


@dataclass(frozen=True)
class EpochSchedule:
    """Dyadic epochs of the recursive learner.

    ``boundaries(p)`` lists T_0 < ... < T_{N_p} for depth p, N_p = 2^(P-p).
    """

    T: int
    P: int

    def __post_init__(self):
        if self.P < 0:
            raise ConfigurationError("depth must be >= 0")
        if self.T < 2**self.P:
            raise ConfigurationError(f"T={self.T} < 2^P = {2**self.P}")

    def boundaries(self, p: int) -> list:
        if not 0 <= p <= self.P:
            raise ConfigurationError(f"depth {p} outside [0, {self.P}]")
        bounds = [0, self.T]
        for _ in range(self.P - p):
            nxt = [bounds[0]]
            for a, b in zip(bounds, bounds[1:]):
                nxt += [split_point(a, b), b]
            bounds = nxt
        return bounds

    def epochs(self, p: int) -> list:
        b = self.boundaries(p)
        return list(zip(b, b[1:]))

    def epoch_of(self, p: int, t: int) -> int:
        """Index k (1-based) of the depth-p epoch containing round t."""
        for k, (a, b) in enumerate(self.epochs(p), start=1):
            if a < t <= b:
                return k
        raise ConfigurationError(f"round {t} outside (0, {self.T}]")


def flat_boundaries(T: int, K: int) -> list:
    """T_k = floor(k T / K) for k = 0..K."""
    if not 1 <= K <= T:
        raise ConfigurationError(f"need 1 <= K <= T, got K={K}, T={T}")
    return [k * T // K for k in range(K + 1)]


def default_epochs(T: int, d: int, sigma: float) -> int:
    """K = floor(ln T (T/d)^(1/3) sigma^(-2/3)), clipped to [1, T]."""
    K = math.floor(math.log(T) * (T / d) ** (1 / 3) * sigma ** (-2 / 3))
    return max(1, min(T, K))


def default_scale(T: int, growth: str = "log", p: float | None = None) -> float:
    """Default scale: 1/T for log-type fat-shattering, (ln T / T)^(1/(p+1)) otherwise."""
    if growth == "log":
        return 1.0 / T
    if growth == "poly":
        if p is None:
            raise ConfigurationError("polynomial growth needs the exponent p")
        return (math.log(T) / T) ** (1.0 / (p + 1))
    raise ConfigurationError(f"unknown growth type {growth!r}")
