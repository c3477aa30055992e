"""Log-log scaling fits."""

from __future__ import annotations

import math
import warnings

import numpy as np

from ..errors import ConfigurationError
from . import io


def fit_scaling_exponent(points) -> tuple:
    """Least squares of log2(regret) on log2(size): (slope, intercept, R^2).

    Points with non-positive regret are dropped with a warning; at least three
    must remain.
    """
    pts = [(float(s), float(r)) for s, r in points]
    kept = [(s, r) for s, r in pts if r > 0 and s > 0]
    if len(kept) < len(pts):
        warnings.warn(f"dropped {len(pts) - len(kept)} non-positive point(s) from the fit",
                      stacklevel=2)
    if len(kept) < 3:
        raise ConfigurationError("need at least three positive points to fit a slope")
    x = np.log2([s for s, _ in kept])
    y = np.log2([r for _, r in kept])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def fit_from_csv(path, x: str = "T", y: str = "mean_final_adaptive_regret",
                 where: dict | None = None) -> tuple:
    rows = io.read_rows(path)
    if where:
        rows = [r for r in rows if all(str(r.get(k)) == str(v) for k, v in where.items())]
    pts = [(r[x], r[y]) for r in rows if r.get(y) not in (None, "") and not
           math.isnan(float(r[y]))]
    return fit_scaling_exponent(pts)
