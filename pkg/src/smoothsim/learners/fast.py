"""Compiled recursive-cover engine for threshold classes (classification).

Same algorithm, node order, random keys and arithmetic kernels as
:class:`~smoothsim.learners.rcover.RCoverReference`, stored as flat arrays.
Query points are interned per coordinate; cells keep point ids and compare
through a rank table, so exact (rational) positions never enter compiled code.

Each child has exactly one parent in the classification tree (children
partition the parent's cell), so no node table is needed.
"""

from __future__ import annotations

import bisect
import math
from fractions import Fraction

import numpy as np
from numba import njit

from .. import rng as krng
from ..experts import accumulate, advance, initial_eta, sample, weights
from ..model import Cut, DimensionError
from .base import OnlineLearner
from .schedule import EpochSchedule, default_depth

# integer node fields
DEPTH, START, MID, END, ALPHA, SLOT0, NSLOT, PERIOD, STAMP, PRED, CHOSEN, SLOTA0, NSLOTA0 = range(13)
NI = 13
# float node fields
ETA, DELTA, DMAX, DSUM = range(4)
NF = 4
# meta counters
M_NODES, M_SLOTS, M_TOUCHED, M_NEED_NODES, M_NEED_SLOTS, M_STAMP = range(6)

_CELL0 = np.uint64(0x63656C6C)


@njit(cache=True)
def _cell_hash(lo, hi, phash, low_hash):
    h = _CELL0
    for j in range(lo.size):
        a = low_hash if lo[j] == 0 else phash[j, lo[j]]
        h = krng.combine(krng.combine(h, a), phash[j, hi[j]])
    return h


@njit(cache=True)
def _activate(n, alpha, ni, nf, lo, hi, nhash, schild, sR, rank, id_of_rank,
              phash, obs_k, obs_id, meta, stream, low_hash):
    d = lo.shape[1]
    start, mid, end = ni[n, START], ni[n, MID], ni[n, END]
    if alpha == 0:
        w0, w1, c0, c1 = start, start, start, mid
    else:
        w0, w1, c0, c1 = start, mid, mid, end
    # distinct window points strictly inside the cell, per coordinate, by rank
    width = w1 - w0
    inner = np.empty((d, width + 1), dtype=np.int64)
    counts = np.zeros(d, dtype=np.int64)
    for s in range(w0, w1):
        j = obs_k[s]
        r = rank[j, obs_id[s]]
        if r > rank[j, lo[n, j]] and r < rank[j, hi[n, j]]:
            inner[j, counts[j]] = r
            counts[j] += 1
    radix = np.empty(d, dtype=np.int64)
    total = 1
    for j in range(d):
        if counts[j] > 0:
            srt = np.sort(inner[j, :counts[j]])
            m = 1
            for i in range(1, srt.size):
                if srt[i] != srt[m - 1]:
                    srt[m] = srt[i]
                    m += 1
            inner[j, :m] = srt[:m]
            counts[j] = m
        radix[j] = counts[j] + 1
        total *= radix[j]
    if meta[M_NODES] + total > ni.shape[0] or meta[M_SLOTS] + total + 1 > schild.size:
        meta[M_NEED_NODES] = meta[M_NODES] + total
        meta[M_NEED_SLOTS] = meta[M_SLOTS] + total + 1
        return 1
    s0 = meta[M_SLOTS]
    schild[s0] = -1
    sR[s0] = 0.0
    digits = np.zeros(d, dtype=np.int64)
    # running cell-hash prefixes in odometer order (coordinate 1 slowest)
    pre = np.empty(d + 1, dtype=np.uint64)
    pre[0] = _CELL0
    base = krng.combine(krng.combine(stream, np.uint64(ni[n, DEPTH] - 1)), np.uint64(c0))
    for c in range(total):
        child = meta[M_NODES]
        meta[M_NODES] += 1
        rem = c
        for j in range(d - 1, -1, -1):
            digits[j] = rem % radix[j]
            rem //= radix[j]
        # first coordinate whose digit changed since the previous child
        first = 0
        if c > 0:
            first = d - 1
            while first > 0 and digits[first] == 0:
                first -= 1
        for j in range(d):
            g = digits[j]
            a = lo[n, j] if g == 0 else id_of_rank[j, inner[j, g - 1]]
            b = hi[n, j] if g == counts[j] else id_of_rank[j, inner[j, g]]
            lo[child, j] = a
            hi[child, j] = b
            if j >= first:
                ha = low_hash if a == 0 else phash[j, a]
                pre[j + 1] = krng.combine(krng.combine(pre[j], ha), phash[j, b])
        ni[child, DEPTH] = ni[n, DEPTH] - 1
        ni[child, START] = c0
        ni[child, END] = c1
        ni[child, MID] = (c0 + c1) // 2
        ni[child, ALPHA] = -1
        ni[child, SLOT0] = 0
        ni[child, NSLOT] = 0
        ni[child, PERIOD] = 1
        ni[child, STAMP] = -1
        ni[child, PRED] = 0
        ni[child, CHOSEN] = 0
        ni[child, SLOTA0] = -1
        ni[child, NSLOTA0] = 0
        for f in range(NF):
            nf[child, f] = 0.0
        nhash[child] = krng.combine(base, pre[d])
        schild[s0 + 1 + c] = child
        sR[s0 + 1 + c] = 0.0
    meta[M_SLOTS] += total + 1
    K = total + 1
    ni[n, ALPHA] = alpha
    ni[n, SLOT0] = s0
    ni[n, NSLOT] = K
    ni[n, PERIOD] = 1
    if alpha == 0:
        ni[n, SLOTA0] = s0
        ni[n, NSLOTA0] = K
    nf[n, ETA] = initial_eta(math.log(K))
    nf[n, DELTA] = 0.0
    nf[n, DMAX] = 1.0
    return 0


@njit(cache=True)
def _evaluate(t, k, xid, ni, nf, lo, hi, nhash, schild, sR, sp, rank, id_of_rank,
              phash, obs_k, obs_id, meta, stack, touched, stream, low_hash):
    """Evaluate every non-unanimous node at x; 0 on success, 1 if arrays must grow."""
    stamp = meta[M_STAMP]
    nt = 0
    top = 1
    stack[0] = 0
    rx = rank[k, xid]
    # Entries n >= 0 are unexpanded nodes and -n-1 marks a node whose children
    # are done.  Children have a single parent, so each is reached once per
    # round, and the unanimous ones are resolved by the parent directly.
    if rx <= rank[k, lo[0, k]] or rx >= rank[k, hi[0, k]] or ni[0, DEPTH] == 0:
        ni[0, PRED] = 0 if rx <= rank[k, lo[0, k]] else 1
        ni[0, STAMP] = stamp
        meta[M_TOUCHED] = 0
        return 0
    while top > 0:
        e = stack[top - 1]
        if e >= 0:
            n = e
            alpha = 0 if t <= ni[n, MID] else 1
            if ni[n, ALPHA] != alpha:
                if _activate(n, alpha, ni, nf, lo, hi, nhash, schild, sR, rank,
                             id_of_rank, phash, obs_k, obs_id, meta, stream, low_hash):
                    return 1
            s0 = ni[n, SLOT0]
            K = ni[n, NSLOT]
            leaf = ni[n, DEPTH] == 1
            stack[top - 1] = -n - 1
            any0 = 0
            for j in range(1, K):
                c = schild[s0 + j]
                if rx <= rank[k, lo[c, k]]:
                    ni[c, STAMP] = stamp
                    ni[c, PRED] = 0
                    any0 = 1
                elif leaf or rx >= rank[k, hi[c, k]]:
                    ni[c, STAMP] = stamp
                    ni[c, PRED] = 1
                else:
                    stack[top] = c
                    top += 1
            ni[n, CHOSEN] = any0
            continue
        n = -e - 1
        top -= 1
        s0 = ni[n, SLOT0]
        K = ni[n, NSLOT]
        ni[n, STAMP] = stamp
        split_here = ni[n, CHOSEN] == 1
        if not split_here:
            for j in range(1, K):
                if ni[schild[s0 + j], PRED] == 0:
                    split_here = True
                    break
        if not split_here:
            ni[n, PRED] = 1
            continue
        R = sR[s0:s0 + K]
        p = sp[s0:s0 + K]
        weights(R, nf[n, ETA], p)
        j = sample(p, krng.keyed_uniform(nhash[n], t))
        ni[n, CHOSEN] = j
        ni[n, PRED] = 1 if j == 0 else ni[schild[s0 + j], PRED]
        touched[nt] = n
        nt += 1
    meta[M_TOUCHED] = nt
    return 0


@njit(cache=True)
def _update(loss0, loss1, ni, nf, schild, sR, sp, sL, meta, touched):
    for i in range(meta[M_TOUCHED]):
        n = touched[i]
        s0 = ni[n, SLOT0]
        K = ni[n, NSLOT]
        L = sL[s0:s0 + K]
        L[0] = loss1
        for j in range(1, K):
            L[j] = loss1 if ni[schild[s0 + j], PRED] == 1 else loss0
        R = sR[s0:s0 + K]
        inc, _ = accumulate(R, sp[s0:s0 + K], L, ni[n, CHOSEN])
        delta, dmax, eta, reset = advance(nf[n, DELTA], nf[n, DMAX], nf[n, ETA], inc,
                                          math.log(K), 0)
        nf[n, DELTA] = delta
        nf[n, DMAX] = dmax
        nf[n, ETA] = eta
        if reset:
            R[:] = 0.0
            ni[n, PERIOD] += 1
        nf[n, DSUM] += inc
    meta[M_TOUCHED] = 0


class _Registry:
    """Per-coordinate interning of exact positions with a rank table."""

    def __init__(self, d, cap=256):
        self.d = d
        self.values = [[None] for _ in range(d)]  # id 0 is the low sentinel
        self.sorted = [[] for _ in range(d)]
        self.ids = [dict() for _ in range(d)]
        self.rank = np.full((d, cap), -1, dtype=np.int64)
        self.id_of_rank = np.zeros((d, cap), dtype=np.int64)
        self.phash = np.zeros((d, cap), dtype=np.uint64)
        for j in range(d):
            self.intern(j, Fraction(1))

    def _grow(self):
        cap = self.rank.shape[1] * 2
        for name, fill in (("rank", -1), ("id_of_rank", 0), ("phash", 0)):
            old = getattr(self, name)
            new = np.full((self.d, cap), fill, dtype=old.dtype)
            new[:, :old.shape[1]] = old
            setattr(self, name, new)

    def intern(self, j, v) -> int:
        got = self.ids[j].get(v)
        if got is not None:
            return got
        pid = len(self.values[j])
        if pid >= self.rank.shape[1]:
            self._grow()
        self.values[j].append(v)
        self.ids[j][v] = pid
        self.phash[j, pid] = krng.value_hash(v)
        srt = self.sorted[j]
        i = bisect.bisect_left(srt, v)
        srt.insert(i, v)
        n = len(srt)
        row = self.id_of_rank[j]
        row[i + 1:n] = row[i:n - 1].copy()
        row[i] = pid
        self.rank[j, row[i:n]] = np.arange(i, n)
        return pid


class RCoverFast(OnlineLearner):
    """Compiled classification engine for Threshold1D / ProductThreshold."""

    name = "rcover"

    def __init__(self, cls, T, depth=None, seed=0, replication=0, stream="rcover",
                 capacity=1024):
        if cls.kind not in ("threshold", "product"):
            raise DimensionError("the compiled engine handles threshold classes only")
        super().__init__(cls, T)
        self.P = default_depth(T) if depth is None else int(depth)
        self.schedule = EpochSchedule(T, self.P)
        self.d = cls.d
        self.stream = krng.stream_key(seed, replication, stream)
        self.low_hash = krng.LOW_SENTINEL
        self.reg = _Registry(self.d)
        self.obs_k = np.zeros(T, dtype=np.int64)
        self.obs_id = np.zeros(T, dtype=np.int64)
        self.meta = np.zeros(6, dtype=np.int64)
        self._alloc(capacity, 4 * capacity)
        # the root
        self.ni[0, :] = 0
        self.ni[0, DEPTH], self.ni[0, START], self.ni[0, END] = self.P, 0, T
        self.ni[0, MID] = T // 2
        self.ni[0, ALPHA] = -1
        self.ni[0, STAMP] = -1
        self.ni[0, SLOTA0] = -1
        self.lo[0, :] = 0
        self.hi[0, :] = 1
        cell = _cell_hash(self.lo[0], self.hi[0], self.reg.phash, self.low_hash)
        self.nhash[0] = krng.node_hash(self.stream, self.P, 0, cell)
        self.meta[M_NODES] = 1
        self._round = None
        self.peak_touched = 0

    # ------------------------------------------------------------- storage
    def _alloc(self, ncap, scap):
        self.ni = np.zeros((ncap, NI), dtype=np.int64)
        self.nf = np.zeros((ncap, NF))
        self.lo = np.zeros((ncap, self.d), dtype=np.int64)
        self.hi = np.zeros((ncap, self.d), dtype=np.int64)
        self.nhash = np.zeros(ncap, dtype=np.uint64)
        self.stack = np.zeros(ncap + 1, dtype=np.int64)
        self.touched = np.zeros(ncap + 1, dtype=np.int64)
        self.schild = np.zeros(scap, dtype=np.int64)
        self.sR = np.zeros(scap)
        self.sp = np.zeros(scap)
        self.sL = np.zeros(scap)

    def _grow(self):
        need_n = max(int(self.meta[M_NEED_NODES]), 2 * self.ni.shape[0])
        need_s = max(int(self.meta[M_NEED_SLOTS]), 2 * self.schild.size)
        old = {k: getattr(self, k) for k in ("ni", "nf", "lo", "hi", "nhash", "schild",
                                             "sR", "sp", "sL")}
        nn, ns = int(self.meta[M_NODES]), int(self.meta[M_SLOTS])
        self._alloc(need_n, need_s)
        for k in ("ni", "nf", "lo", "hi", "nhash"):
            getattr(self, k)[:nn] = old[k][:nn]
        for k in ("schild", "sR", "sp", "sL"):
            getattr(self, k)[:ns] = old[k][:ns]

    # ------------------------------------------------------------ protocol
    def _locate(self, x):
        if x.coordinate > self.d:
            raise DimensionError(f"coordinate {x.coordinate} > d = {self.d}")
        k = x.coordinate - 1
        return k, self.reg.intern(k, x.position)

    def _evaluate_round(self, t, x):
        if self._round == (t, x):
            return int(self.ni[0, PRED])
        k, xid = self._locate(x)
        r = self.reg
        while True:
            self.meta[M_STAMP] += 1
            status = _evaluate(t, k, xid, self.ni, self.nf, self.lo, self.hi, self.nhash,
                               self.schild, self.sR, self.sp, r.rank, r.id_of_rank,
                               r.phash, self.obs_k, self.obs_id, self.meta, self.stack,
                               self.touched, self.stream, self.low_hash)
            if status == 0:
                break
            self._grow()
        self._round = (t, x)
        self.peak_touched = max(self.peak_touched, int(self.meta[M_TOUCHED]))
        return int(self.ni[0, PRED])

    def _value(self, t, x):
        return self._evaluate_round(t, x)

    def _on_observe(self, t, x, loss):
        self._evaluate_round(t, x)
        _update(float(loss(0.0)), float(loss(1.0)), self.ni, self.nf, self.schild,
                self.sR, self.sp, self.sL, self.meta, self.touched)
        k, xid = self._locate(x)
        self.obs_k[t - 1] = k
        self.obs_id[t - 1] = xid
        self._round = None

    def _ensure(self, n, t):
        alpha = 0 if t <= self.ni[n, MID] else 1
        r = self.reg
        while self.ni[n, ALPHA] != alpha:
            if _activate(n, alpha, self.ni, self.nf, self.lo, self.hi, self.nhash,
                         self.schild, self.sR, r.rank, r.id_of_rank, r.phash,
                         self.obs_k, self.obs_id, self.meta, self.stream,
                         self.low_hash):
                self._grow()

    def _cuts(self, n):
        vals = self.reg.values
        return tuple(Cut(0) if self.lo[n, j] == 0 else Cut(vals[j][self.lo[n, j]], open=True)
                     for j in range(self.d))

    def _member(self, t):
        n = 0
        while self.ni[n, DEPTH] > 0:
            self._ensure(n, t)
            s0, K = self.ni[n, SLOT0], self.ni[n, NSLOT]
            p = np.empty(K)
            weights(self.sR[s0:s0 + K], self.nf[n, ETA], p)
            j = sample(p, krng.keyed_uniform(self.nhash[n], t))
            if j == 0:
                break
            n = int(self.schild[s0 + j])
        return self._cuts(n)

    # ------------------------------------------------------ instrumentation
    def node_counts(self) -> dict:
        nn = int(self.meta[M_NODES])
        keys, counts = np.unique(self.ni[:nn, [DEPTH, START]], axis=0, return_counts=True)
        return {(int(a), int(b)): int(c) for (a, b), c in zip(keys, counts)}

    def _contains(self, n, member):
        vals = self.reg.values
        for j, c in enumerate(member):
            lo, hi = self.lo[n, j], self.hi[n, j]
            h = vals[j][hi]
            if c.at > h or (c.at == h and c.open):
                return False
            if lo != 0:
                a = vals[j][lo]
                if c.at < a or (c.at == a and not c.open):
                    return False
        return True

    def trajectory(self, member) -> list:
        member = self.cls.member(member)
        out, frontier = [], [0]
        while frontier:
            n = frontier.pop()
            ni = self.ni[n]
            out.append((int(ni[DEPTH]), int(ni[START]), int(ni[END]),
                        float(self.nf[n, DSUM]), self._cuts(n)))
            ranges = []
            if ni[ALPHA] == 1:
                ranges.append((ni[SLOT0], ni[NSLOT]))
            if ni[SLOTA0] >= 0:
                ranges.append((ni[SLOTA0], ni[NSLOTA0]))
            for s0, K in ranges:
                for j in range(1, K):
                    c = int(self.schild[s0 + j])
                    if self._contains(c, member):
                        frontier.append(c)
                        break
        return sorted(out, key=lambda r: (-r[0], r[1]))

    def stats(self) -> dict:
        return {"nodes": int(self.meta[M_NODES])}
