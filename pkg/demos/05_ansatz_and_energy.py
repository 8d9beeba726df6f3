"""Build the multi-bubble ansatz, measure its weighted residual, and compare
the numerically integrated energy with the closed two-term expansion.
"""
import math

import numpy as np

from bubblekit import ansatz, energy, greens

disk = greens.build_backend(greens.DomainSpec.unit_disk())
t_star = math.sqrt(math.sqrt(5.0) - 2.0)
pts = np.array([[t_star, 0.0], [-t_star, 0.0]])
signs = [1, -1]

for lam in (1e-6, 1e-8, 1e-10):
    params = ansatz.make_params(disk, pts, signs, 1.0, lam)
    ans = ansatz.build_ansatz(disk, pts, signs, params)
    res = ansatz.residual_norm(ans)
    erep = energy.j_lambda(ans)
    brep = energy.beta_lambda(ans)
    print(f"lambda {lam:.0e}: gamma {params.gamma:8.3f}  "
          f"||E||_* {res.norm:.3e}  "
          f"J {erep.j_lambda:12.4f} (closed {erep.f_expansion:12.4f})  "
          f"beta - 8pi {brep.deviation:+.3e}")

# at p != 1 the level deviates from 4 pi m at rate gamma^{-2p}
params = ansatz.make_params(disk, np.zeros((1, 2)), [1], 1.5, 1e-8)
ans = ansatz.build_ansatz(disk, np.zeros((1, 2)), [1], params)
b = energy.beta_lambda(ans)
scaled = b.deviation * b.gamma ** 3.0 / (4.0 * math.pi)
print(f"p=1.5 single bubble: scaled level deviation {scaled:.4f} "
      f"(limit 4(p-1)/p^2 = {4.0 * 0.5 / 2.25:.4f})")
