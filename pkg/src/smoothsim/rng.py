"""Keyed counter-based random numbers.

Every random draw is a pure function of (stream key, counter), so memoized
tree nodes, literal tree nodes and the compiled engine all see the same
uniform for the same (node, round).  The mixer is SplitMix64's finalizer.
Adversary streams use numpy's Philox, which is also counter-based.
"""

from __future__ import annotations

import hashlib
from fractions import Fraction

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = np.uint64(30), np.uint64(27), np.uint64(31), np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0

LOW_SENTINEL = np.uint64(0x6C6F772D73656E74)  # hash of the "closed at 0" cell end


@njit(cache=True)
def mix64(z):
    z = z + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def combine(h, v):
    return mix64(h ^ mix64(v))


@njit(cache=True)
def keyed_uniform(key, t):
    """Uniform in [0, 1) for stream ``key`` at counter ``t``."""
    z = combine(key, np.uint64(t))
    return float(z >> _S11) * _INV53


def digest64(*parts) -> np.uint64:
    """Stable 64-bit digest of printable parts."""
    h = hashlib.blake2b("/".join(map(str, parts)).encode(), digest_size=8)
    return np.uint64(int.from_bytes(h.digest(), "little"))


def value_hash(v) -> np.uint64:
    """Hash of an exact real value; floats and equal Fractions agree."""
    f = Fraction(v)
    return digest64("q", f.numerator, f.denominator)


def stream_key(seed: int, replication: int, stream: str) -> np.uint64:
    return digest64("stream", int(seed), int(replication), stream)


def generator(seed: int, replication: int, stream: str) -> np.random.Generator:
    """Philox generator for an adversary-side stream."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, int(replication),
                                 int(digest64(stream)) & 0xFFFFFFFF])
    return np.random.Generator(np.random.Philox(ss))


def combine_py(h, v) -> np.uint64:
    """``combine`` for Python callers (compiled code returns plain ints)."""
    return np.uint64(combine(np.uint64(h), np.uint64(v)))


def cell_hash(lo_hashes, hi_hashes) -> np.uint64:
    h = np.uint64(0x63656C6C)
    for a, b in zip(lo_hashes, hi_hashes):
        h = combine_py(combine_py(h, a), b)
    return h


def node_hash(stream, depth: int, start: int, cell) -> np.uint64:
    """Key of the node (depth, epoch start, version-space cell)."""
    return combine_py(combine_py(combine_py(stream, depth), start), cell)
