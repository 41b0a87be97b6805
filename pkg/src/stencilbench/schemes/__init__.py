"""Numerical schemes: linear forward-backward, nonlinear leapfrog, and the
high-resolution finite-volume solver, each in instrumented launch variants."""

from . import ctcs, hires, linear  # noqa: F401  (kernel registration side effects)
