"""Real-argument gamma function helpers.

Thin wrappers over ``math.gamma`` / ``math.lgamma`` that handle poles and the
overflow range.  Numba compiles both math functions natively, so
:mod:`fracdirac._kernels` can compile copies of these helpers.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import wofz

__all__ = ["lgamma_sign", "rgamma", "gamma", "erfcx_neg"]

_GAMMA_MAX = 171.0


def lgamma_sign(x):
    """Return ``(log|Γ(x)|, sign Γ(x))``; ``(inf, 0.0)`` at the poles."""
    if x <= 0.0 and x == math.floor(x):
        return math.inf, 0.0
    sgn = 1.0 if x > 0.0 or math.floor(x) % 2.0 == 0.0 else -1.0
    return math.lgamma(x), sgn


def rgamma(x):
    """1/Γ(x) for real ``x``; exactly zero at the poles of Γ."""
    if x <= 0.0 and x == math.floor(x):
        return 0.0
    if abs(x) < 1e-300:
        return x  # Γ(x) overflows; 1/Γ(x) = x + γx² + ...
    if -_GAMMA_MAX < x < _GAMMA_MAX:
        return 1.0 / math.gamma(x)
    sgn = 1.0 if x > 0.0 or math.floor(x) % 2.0 == 0.0 else -1.0
    lg = math.lgamma(x)
    return sgn * math.exp(-lg) if lg > -709.0 else sgn * math.inf


def gamma(x):
    if x <= 0.0 and x == math.floor(x):
        return math.nan
    if -_GAMMA_MAX < x < _GAMMA_MAX:
        return math.gamma(x)
    sgn = 1.0 if x > 0.0 or math.floor(x) % 2.0 == 0.0 else -1.0
    lg = math.lgamma(x)
    return sgn * (math.inf if lg > 709.0 else math.exp(lg))


def erfcx_neg(z):
    """exp(z**2) * erfc(-z) for complex ``z`` via the Faddeeva function.

    ``w(-i z) = exp(z**2) erfc(-z)``; ``scipy.special.wofz`` is used so this
    stays independent of the Mittag-Leffler code paths.
    """
    return wofz(-1j * np.asarray(z, dtype=complex))
