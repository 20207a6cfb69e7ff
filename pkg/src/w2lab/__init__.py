"""Desk-scale verification laboratory for a quadratic-transport CLT.

Modules: :mod:`gaussmath` (diagonal Gaussian geometry and the quadrature
oracle), :mod:`samplers` (bounded mean-zero vector families),
:mod:`transport` (exact and entropic optimal transport), :mod:`qstats`
(Q-statistics and their moment bounds), :mod:`densities` (density ratios and
the transportation-inequality chain), :mod:`bounds` (increment and induction
bounds), :mod:`experiments` (rate, lattice-floor, and halfspace
reproductions), :mod:`checks` (the verdict registry), :mod:`cli` (the
command-line surface).
"""

__version__ = "0.1.0"
