"""Numerical toolkit for multi-bubble concentration in a planar
exponential-nonlinearity Dirichlet problem.

Subpackages cover the Dirichlet Green's function machinery, the signed
point-vortex (Kirchhoff-Routh) functional and its critical points, radial
bubble correction profiles, the closed-form integral catalog, the assembled
multi-bubble approximation and its weighted residual, energy and level
expansions, and a nonlinear PDE solver with nodal analysis.
"""

__version__ = "0.1.0"
