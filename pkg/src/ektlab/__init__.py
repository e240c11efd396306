"""Numerical laboratory for constant mean curvature surfaces in E(kappa, tau) spaces."""

__version__ = "0.1.0"
