"""Locate critical points of the interaction energy phi_m on the unit disk.

For one positive vortex the maximum sits at the origin; for a +/- pair the
critical antipodal configuration sits at t = sqrt(sqrt(5) - 2) on a diameter.
"""
import math

from bubblekit import greens, kirchhoff_routh as kr

disk = greens.build_backend(greens.DomainSpec.unit_disk())

single = kr.find_critical(disk, [1], starts=16, seed=3)[0]
print(f"m=1: critical point {single.points[0]}  ({single.classification})")

pair = kr.find_critical(disk, [1, -1], starts=48, seed=7)[0]
t_star = math.sqrt(math.sqrt(5.0) - 2.0)
print(f"m=2 (+,-): points\n{pair.points}")
print(f"reference t* = {t_star:.12f}")
print(f"value {pair.value:.12f}, grad norm {pair.grad_norm:.1e}, "
      f"{pair.classification}, stable={pair.stable}")

axis = kr.find_critical_on_axis(disk, 2)
print(f"1D axis search: t = {abs(axis.points[0, 0]):.12f}")
