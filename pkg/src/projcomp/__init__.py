"""Numerical verification engine for projective and para-c-projective
compactifications of Einstein metrics.

Everything is evaluated in explicit coordinates through exact truncated
Taylor arithmetic (projcomp.jets); claims are certified by residual checks
at randomized sample points and by boundary-limit extrapolation ladders.
"""

__version__ = "0.1.0"
