"""Trace (JSON lines) and summary (CSV) files."""

from __future__ import annotations

import csv
import json
import math
from fractions import Fraction
from pathlib import Path
from statistics import median

SUMMARY_COLUMNS = ("run_id", "seed", "learner", "T", "sigma", "d", "epsilon", "depth",
                   "final_adaptive_regret", "final_oblivious_regret", "mistakes", "wall_ms")

GROUP_COLUMNS = ("learner", "T", "sigma", "d", "epsilon", "depth")
STAT_COLUMNS = ("final_adaptive_regret", "final_oblivious_regret", "mistakes")


def number(v, exact: bool = False):
    """JSON-friendly value; with ``exact`` Fractions are written as 'p/q'."""
    if exact and isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    return float(v)


def write_trace(path, records) -> None:
    with open(path, "w", newline="\n") as fh:
        for r in records:
            fh.write(json.dumps(r, separators=(",", ":")) + "\n")


def read_trace(path) -> list:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def write_rows(path, rows, columns) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in columns])


def write_summary(path, rows) -> None:
    write_rows(path, rows, SUMMARY_COLUMNS)


def read_rows(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def mean_stderr(values) -> tuple:
    vals = [float(v) for v in values]
    n = len(vals)
    if n == 0:
        return math.nan, math.nan
    m = sum(vals) / n
    if n == 1:
        return m, 0.0
    var = sum((v - m) ** 2 for v in vals) / (n - 1)
    return m, math.sqrt(var / n)


def aggregate(rows) -> list:
    """Mean, standard error and median per (learner, T, sigma, d, epsilon, depth)."""
    groups: dict = {}
    for r in rows:
        groups.setdefault(tuple(r.get(c) for c in GROUP_COLUMNS), []).append(r)
    out = []
    for key, rs in groups.items():
        row = dict(zip(GROUP_COLUMNS, key))
        row["n"] = len(rs)
        for c in STAT_COLUMNS:
            vals = [float(r[c]) for r in rs]
            row[f"mean_{c}"], row[f"stderr_{c}"] = mean_stderr(vals)
            row[f"median_{c}"] = median(vals)
        out.append(row)
    return out


AGGREGATE_COLUMNS = GROUP_COLUMNS + ("n",) + tuple(
    f"{s}_{c}" for c in STAT_COLUMNS for s in ("mean", "stderr", "median"))


def write_aggregate(path, rows) -> None:
    write_rows(path, rows, AGGREGATE_COLUMNS)


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
