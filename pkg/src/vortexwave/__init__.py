"""Traveling gravity water waves with submerged point vortices.

Conformal-strip pseudo-spectral solver with pseudo arc-length
continuation, exact zero-gravity and small-amplitude validation oracles,
physical-space post-processing, and leading-order hollow-vortex
desingularization.
"""

__version__ = "0.1.0"
