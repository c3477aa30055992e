"""
The bisection lower-bound machine
=================================

A smooth adversary can still force mistakes: it keeps a small mass q on the
midpoint of an interval that it halves with a fresh coin flip every time the
midpoint is hit.  Nobody can predict the coin, so every learner pays about
half a mistake per hit, while the labels stay realizable.
"""

import numpy as np

from smoothsim.adversary import lowerbound_adversary, lowerbound_value
from smoothsim.harness import ExperimentConfig, run_experiment

# The machine for d=1, sigma=0.25, T=300 has q = 0.1 and N = 30 bits, and its
# worst round has density ratio exactly 1/sigma against the declared base.
adv = lowerbound_adversary(1, 0.25, 300, np.random.default_rng(0), exact=True)
print("q =", adv.q, " N =", adv.N)
for t in range(1, 301):
    adv.distribution(t)
    adv.certificate()
    adv.respond(adv.draw())
print("largest density ratio:", adv.max_ratio)

# Every learner, 40 replications.  The bound is min(sqrt(dT(1-s)/s)/12, T/24).
cfg = ExperimentConfig(T=300, reps=40, adversary="lowerbound", sigma=0.25,
                       learners=("rcover", "cover", "erm", "fixed"))
res = run_experiment(cfg)
print(f"bound {lowerbound_value(1, 0.25, 300):.2f}")
for agg in res.aggregate:
    print(f"{agg['learner']:>7}: {agg['mean_mistakes']:6.2f} mistakes "
          f"(stderr {agg['stderr_mistakes']:.2f})")
