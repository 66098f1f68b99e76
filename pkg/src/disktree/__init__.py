"""Gradient trees in R and Schwarz-Christoffel disks in T*R.

Builds both objects from affine line data, evaluates the disk map through
hypergeometric series with an independent quadrature oracle, solves the
four-marked-point accessory parameter, and verifies sup-norm convergence of
the disks to the trees with explicit analytic error bounds.
"""

__version__ = "0.1.0"
