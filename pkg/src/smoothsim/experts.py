"""Prediction with expert advice: the adaptive doubling forecaster and Hedge.

The numeric work lives in small compiled kernels (``weights``, ``sample``,
``accumulate``, ``advance``).  The tree engines in :mod:`smoothsim.learners`
call the same kernels, which keeps their traces bit-identical: every sum is
sequential and ``exp`` is the scalar libm one.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ConfigurationError, ProtocolError

AEXP, HEDGE = 0, 1


@njit(cache=True)
def weights(R, eta, p):
    """p_i proportional to exp(eta R_i), normalized after max subtraction."""
    K = R.size
    m = R[0]
    for i in range(1, K):
        if R[i] > m:
            m = R[i]
    s = 0.0
    prev = math.nan
    w = 0.0
    for i in range(K):
        # runs of equal regrets are common in the tree; the reused value is
        # the same exp of the same argument
        if R[i] != prev:
            prev = R[i]
            w = math.exp(eta * (prev - m))
        p[i] = w
        s += w
    for i in range(K):
        p[i] = p[i] / s


@njit(cache=True)
def sample(p, u):
    """Inverse-CDF draw from p with a uniform u in [0, 1)."""
    K = p.size
    total = 0.0
    for i in range(K):
        total += p[i]
    target = u * total
    c = 0.0
    for i in range(K):
        c += p[i]
        if c > target:
            return i
    return K - 1


@njit(cache=True)
def accumulate(R, p, losses, chosen):
    """R += r with r_i = l_chosen - l_i.  Returns (sum p r^2, sum p l)."""
    lc = losses[chosen]
    inc = 0.0
    mean = 0.0
    for i in range(R.size):
        r = lc - losses[i]
        R[i] += r
        inc += p[i] * r * r
        mean += p[i] * losses[i]
    return inc, mean


@njit(cache=True)
def advance(delta, delta_max, eta, inc, log_k, mode):
    """Doubling-trick bookkeeping after one update.

    Returns (delta, delta_max, eta, reset).  The caller zeroes R on reset.
    """
    delta += inc
    if mode == 0 and delta > delta_max:
        delta_max = 4.0 * delta_max
        eta = math.sqrt(2.0 * log_k / (delta_max + 1.0))
        return 0.0, delta_max, eta, True
    return delta, delta_max, eta, False


@njit(cache=True)
def initial_eta(log_k):
    return math.sqrt(2.0 * log_k / 2.0)


@njit(cache=True)
def log_count(K):
    return math.log(K)


@dataclass
class ForecasterState:
    """State of one forecaster.  ``R`` holds the current-period regrets."""

    K: int
    mode: int = AEXP
    eta: float = 0.0
    R: np.ndarray = None
    period: int = 1
    delta: float = 0.0
    delta_max: float = 1.0
    delta_total: float = 0.0
    expected_loss: float = 0.0
    losses: np.ndarray = None
    rounds: int = 0
    history: list | None = None
    p: np.ndarray = field(default=None, repr=False)
    _fresh: bool = field(default=False, repr=False)

    @property
    def log_k(self) -> float:
        return log_count(self.K)

    def probabilities(self) -> np.ndarray:
        if not self._fresh:
            weights(self.R, self.eta, self.p)
            self._fresh = True
        return self.p

    def choose(self, u: float) -> int:
        return sample(self.probabilities(), u)

    def update(self, chosen: int, losses) -> float:
        """In-place update with the round's loss vector; returns sum p r^2."""
        losses = np.asarray(losses, dtype=float)
        if losses.shape != (self.K,):
            raise ProtocolError(f"expected {self.K} losses, got {losses.shape}")
        if losses.min() < 0 or losses.max() > 1:
            raise ProtocolError("losses must lie in [0, 1]")
        if not 0 <= chosen < self.K:
            raise ProtocolError(f"chosen index {chosen} out of range")
        p = self.probabilities()
        if self.history is not None:
            self.history.append((p.copy(), losses.copy(), int(chosen)))
        inc, mean = accumulate(self.R, p, losses, chosen)
        self.delta, self.delta_max, self.eta, reset = advance(
            self.delta, self.delta_max, self.eta, inc, self.log_k, self.mode)
        if reset:
            self.R[:] = 0.0
            self.period += 1
        self.delta_total += inc
        self.expected_loss += mean
        self.losses += losses
        self.rounds += 1
        self._fresh = False
        return inc

    @property
    def pseudo_regret(self) -> float:
        return self.expected_loss - float(self.losses.min())

    def copy(self) -> "ForecasterState":
        return copy.deepcopy(self)


def forecaster_init(K: int, mode: str = "aexp", eta: float | None = None,
                    T: int | None = None, keep_history: bool = False) -> ForecasterState:
    """Fresh forecaster over K experts.

    ``mode="hedge"`` uses a fixed eta; if it is not given, eta = sqrt(2 ln K / T).
    """
    if K < 1:
        raise ConfigurationError("need at least one expert")
    log_k = log_count(K)
    if mode == "aexp":
        code, eta = AEXP, initial_eta(log_k)
    elif mode == "hedge":
        code = HEDGE
        if eta is None:
            if T is None:
                raise ConfigurationError("Hedge needs eta or the horizon T")
            eta = math.sqrt(2.0 * log_k / max(T, 1))
    else:
        raise ConfigurationError(f"unknown forecaster mode {mode!r}")
    return ForecasterState(K=K, mode=code, eta=float(eta), R=np.zeros(K),
                           losses=np.zeros(K), p=np.empty(K),
                           history=[] if keep_history else None)


def forecaster_choose(state: ForecasterState, rng) -> int:
    """Sample an expert; ``rng`` is a uniform in [0,1) or a numpy Generator."""
    u = float(rng) if isinstance(rng, (float, np.floating)) else float(rng.random())
    return state.choose(u)


def forecaster_update(state: ForecasterState, chosen: int, losses) -> ForecasterState:
    """Functional update: returns a new state, the input is left untouched."""
    new = state.copy()
    new.update(chosen, losses)
    return new


def lemma_bound(delta_total: float, K: int) -> float:
    return 8.0 * math.sqrt(max(delta_total, 1.0) * math.log(K))


def high_probability_bound(delta_total: float, K: int, delta: float) -> float:
    """Reported (not asserted) bound 12 sqrt(max(D,1) ln K) + 2 ln(1/delta)."""
    return 12.0 * math.sqrt(max(delta_total, 1.0) * math.log(K)) + 2.0 * math.log(1.0 / delta)


def hedge_bound(K: int, T: int, eta: float) -> float:
    if K == 1:
        return 0.0
    return math.log(K) / eta + T * eta / 2.0


def pseudo_regret_certificate(state_or_K, history) -> tuple:
    """(PReg, bound, holds) from a retained history of (p_t, losses_t, chosen_t).

    Delta_T is recomputed from the history, so the check does not trust the
    forecaster's own accumulator.
    """
    K = state_or_K.K if isinstance(state_or_K, ForecasterState) else int(state_or_K)
    if K == 1:
        return 0.0, 0.0, True
    if not history:
        return 0.0, lemma_bound(0.0, K), True
    P = np.array([h[0] for h in history])
    L = np.array([h[1] for h in history])
    chosen = np.array([h[2] for h in history])
    lc = L[np.arange(len(L)), chosen]
    delta_total = float((P * (lc[:, None] - L) ** 2).sum())
    preg = float((P * L).sum() - L.sum(axis=0).min())
    bound = lemma_bound(delta_total, K)
    return preg, bound, preg <= bound


@njit(cache=True)
def simulate(kind, T, K, seed, mode, eta):
    """Run a forecaster on a synthetic stream and report its certificate data.

    kinds: 0 uniform losses, 1 Bernoulli(1/2), 2 unit loss on the current
    leader of p, 3 alternating pair, 4 one good expert, 5 best expert that
    switches five times.  Returns (PReg, Delta_T, periods, sum_t p_t.l_t).
    """
    np.random.seed(seed)
    R = np.zeros(K)
    p = np.empty(K)
    L = np.zeros(K)
    losses = np.empty(K)
    log_k = math.log(K)
    if mode == 0:
        eta = math.sqrt(log_k)
    delta, delta_max, delta_total, expected = 0.0, 1.0, 0.0, 0.0
    periods = 1
    good = np.random.randint(K)
    for t in range(T):
        weights(R, eta, p)
        if kind == 0:
            for i in range(K):
                losses[i] = np.random.random()
        elif kind == 1:
            for i in range(K):
                losses[i] = 1.0 if np.random.random() < 0.5 else 0.0
        elif kind == 2:
            lead = 0
            for i in range(1, K):
                if p[i] > p[lead]:
                    lead = i
            for i in range(K):
                losses[i] = 1.0 if i == lead else 0.0
        elif kind == 3:
            for i in range(K):
                losses[i] = 1.0
            losses[t % 2 if K > 1 else 0] = 0.0
        elif kind == 4:
            for i in range(K):
                losses[i] = 1.0 if np.random.random() < 0.6 else 0.0
            losses[good] = 1.0 if np.random.random() < 0.4 else 0.0
        else:
            b = (t * 5 // max(T, 1) + good) % K
            for i in range(K):
                losses[i] = np.random.random()
            losses[b] = 0.5 * losses[b]
        chosen = sample(p, np.random.random())
        inc, mean = accumulate(R, p, losses, chosen)
        delta, delta_max, eta, reset = advance(delta, delta_max, eta, inc, log_k, mode)
        if reset:
            R[:] = 0.0
            periods += 1
        delta_total += inc
        expected += mean
        for i in range(K):
            L[i] += losses[i]
    return expected - L.min(), delta_total, periods, expected
