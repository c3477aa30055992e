"""
How regret grows with the horizon
=================================

Against the mixture adversary (fresh atoms with mass q = 1/sqrt(T) mixed into
a fixed base) the recursive cover learner's adaptive regret should grow like
sqrt(T) up to log factors.  We sweep T and fit the log-log slope.
"""

from smoothsim.harness import ExperimentConfig, fit_scaling_exponent, sweep

cfg = ExperimentConfig(T=64, reps=20, adversary="mixture", sigma=0.25,
                       learners=("rcover", "cover"))
rows = sweep(cfg, {"T": [64, 128, 256, 512], "learner": ["rcover", "cover"]})

for name in ("rcover", "cover"):
    pts = [(r["T"], r["mean_regret"]) for r in rows if r["learner"] == name]
    for T, m in pts:
        print(f"{name:>6} T={T:4d}: mean regret {m:6.2f}")
    slope, _, r2 = fit_scaling_exponent(pts)
    print(f"{name:>6} slope {slope:.3f}  R2 {r2:.3f}\n")

# A slope near 1/2 is the sqrt(T) rate; anything clearly below 1 is sublinear.
