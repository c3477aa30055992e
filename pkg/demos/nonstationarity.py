"""
Measuring how much a distribution moves
=======================================

gamma(t) is the largest mu_t-mass on which two class members that agree on
the queries seen so far can still disagree.  It is large right after the
adversary moves to new territory and decays once the new region is labeled.
"""

import numpy as np

from smoothsim.diagnostics import epoch_sums, epoch_violation_count, gamma_series
from smoothsim.harness import ExperimentConfig
from smoothsim.harness.run import collect_history

# Two regions, one switch halfway through.
cfg = ExperimentConfig(T=64, adversary="switching", sigma=0.5, support=8,
                       learners=("erm",))
cls, fstar, points, mus = collect_history(cfg)

bounds = list(range(0, 65, 8))
g = gamma_series(cls, points, mus, bounds)
print("gamma at the start of each epoch:", np.round(g[bounds[:-1]], 3))
print("epoch sums:", np.round(epoch_sums(g, bounds), 3))
print("epochs with sum of large gammas >= 1:", epoch_violation_count(g, bounds, 0.25, 1.0))

# The tube version measures E|f - f*| over members close to f* on the prefix.
tube = gamma_series(cls, points, mus, bounds, fstar=fstar, eps=0.0, r=2)
print("tube epoch sums:", np.round(epoch_sums(tube, bounds), 3))
