"""Dirichlet Green's function on the disk (closed form) and on a general
smooth domain (boundary-integral Nystrom backend), side by side.
"""
import numpy as np

from bubblekit import greens

disk = greens.build_backend(greens.DomainSpec.unit_disk())

theta = 2.0 * np.pi * np.arange(256) / 256
circle = greens.build_backend(greens.DomainSpec.parametric(
    np.column_stack([np.cos(theta), np.sin(theta)])))
ellipse = greens.build_backend(greens.DomainSpec.parametric(
    np.column_stack([1.2 * np.cos(theta), 0.8 * np.sin(theta)])))

y = np.array([0.3, -0.2])
print(f"Robin function at {y}:")
print(f"  disk (analytic)   {greens.robin(disk, y):+.12f}")
print(f"  circle (Nystrom)  {greens.robin(circle, y):+.12f}")
print(f"  ellipse (Nystrom) {greens.robin(ellipse, y):+.12f}")

x = np.array([-0.4, 0.1])
print(f"G(x, y) disk    {greens.green(disk, x, y):.12f}")
print(f"G(x, y) circle  {greens.green(circle, x, y):.12f}")
print(f"symmetry defect {abs(greens.green(disk, x, y) - greens.green(disk, y, x)):.1e}")
