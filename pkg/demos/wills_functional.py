"""
The Wills functional and the Gaussian complexity
================================================

W = E exp(sup_f <xi, f> - |f|^2 / 2) is estimated by Monte Carlo on the exact
projection of the class onto m points.  Two facts to watch: a single function
gives exactly 1, and ln W never exceeds the Gaussian complexity E sup <xi, f>.
"""

import numpy as np

from smoothsim.diagnostics import gaussian_complexity_mc, wills_mc
from smoothsim.model import FiniteClass, Instance, Threshold1D

single = [Instance(1, 0.5)]
print("singleton W:", wills_mc(FiniteClass(np.array([[1.0]]), single), single).estimate)

rng = np.random.default_rng(0)
for m in (4, 8, 16, 32):
    pts = [Instance(1, float(z)) for z in np.sort(rng.random(m))]
    g = gaussian_complexity_mc(Threshold1D(), pts, draws=50_000, rng=m)
    print(f"m={m:2d}  ln W = {g.wills.log_estimate:6.3f}  G = {g.estimate:6.3f}  "
          f"holds: {g.inequality_holds}")
