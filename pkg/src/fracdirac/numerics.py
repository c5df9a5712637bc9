"""Grid-based fractional calculus used to cross-check the closed forms.

Nothing here calls the Mittag-Leffler matrix code: the predictor-corrector
solver, the product-trapezoid Riemann-Liouville integral and the L1 Caputo
derivative only use powers and Γ of real arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from . import _kernels
from .dynamics import FractionalOrder, InitialState, Trajectory
from .errors import GridMismatch, InvalidStep
from .mlf import MlOrder, ml_eval
from .special import gamma, rgamma

__all__ = [
    "MemoryKernel",
    "SampledFunction",
    "rl_integral",
    "rl_integral_grid",
    "caputo_l1",
    "caputo_l1_grid",
    "caputo_grid",
    "caputo_pc_solve",
    "volterra_apply",
    "volterra_grid",
    "left_inverse_residual",
    "integral_identity_residual",
]

_GRID_RTOL = 1e-12
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class MemoryKernel:
    """Either ``power_law`` (Δ^{n-α-1}/Γ(n-α)) or ``custom`` (any callable M(Δ))."""

    kind: str
    alpha: float | None = None
    n: int = 1
    func: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind == "power_law":
            a = float(self.alpha)
            if not a > 0.0:
                raise ValueError("power-law kernel needs alpha > 0")
            object.__setattr__(self, "alpha", a)
            object.__setattr__(self, "n", FractionalOrder(a).n)
        elif self.kind == "custom":
            if self.func is None:
                raise ValueError("custom kernel needs a callable")
            if int(self.n) < 1:
                raise ValueError("n must be at least 1")
        else:
            raise ValueError(f"unknown kernel kind {self.kind!r}")

    @classmethod
    def power_law(cls, alpha: float) -> "MemoryKernel":
        return cls("power_law", alpha=alpha)

    @classmethod
    def custom(cls, func, n: int = 1) -> "MemoryKernel":
        return cls("custom", n=int(n), func=func)

    def __call__(self, delta):
        delta = np.asarray(delta, dtype=float)
        if self.kind == "custom":
            return np.asarray(self.func(delta))
        return delta ** (self.n - self.alpha - 1.0) * rgamma(self.n - self.alpha)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Samples on the uniform grid t_k = k h, k = 0..len-1."""

    taus: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        taus = np.asarray(self.taus, dtype=float)
        values = np.asarray(self.values)
        if taus.ndim != 1 or taus.size < 2:
            raise GridMismatch("need at least two grid points")
        if values.shape[0] != taus.size:
            raise GridMismatch("values and taus differ in length")
        h = (taus[-1] - taus[0]) / (taus.size - 1)
        if not h > 0.0:
            raise GridMismatch("grid must be increasing")
        expected = h * np.arange(taus.size)
        if abs(taus[0]) > _GRID_RTOL * h or np.max(np.abs(taus - expected)) > _GRID_RTOL * taus[-1] + 1e-300:
            raise GridMismatch("grid must be uniform and start at 0")
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, func, t_end: float, npts: int) -> "SampledFunction":
        taus = np.linspace(0.0, t_end, npts)
        return cls(taus, np.asarray([func(t) for t in taus]))

    @property
    def h(self) -> float:
        return float(self.taus[-1] / (self.taus.size - 1))

    def index_of(self, tau: float) -> int:
        k = int(round(float(tau) / self.h))
        if k < 0 or k >= self.taus.size or abs(k * self.h - tau) > 1e-9 * max(self.h, abs(tau)):
            raise GridMismatch(f"τ={tau!r} is not a grid point")
        return k

    def columns(self) -> np.ndarray:
        """Values as a complex (len, d) array."""
        v = np.asarray(self.values, dtype=complex)
        return v.reshape(v.shape[0], -1)

    def _shape_like(self, out):
        return out.reshape((out.shape[0],) + self.values.shape[1:])


def _real_if_real(f: SampledFunction, out):
    return out.real if not np.iscomplexobj(f.values) else out


# ---------------------------------------------------------------------------
# Riemann-Liouville integral and L1 Caputo derivative
# ---------------------------------------------------------------------------


def rl_integral(beta: float, f: SampledFunction, tau: float):
    """(1/Γ(β)) ∫_0^τ (τ-s)^{β-1} f(s) ds with f piecewise linear between nodes."""
    if not beta > 0.0:
        raise ValueError("beta must be positive")
    n = f.index_of(tau)
    w = _kernels._rl_node_weights(float(beta), n) * (f.h**beta * rgamma(beta + 2.0))
    out = w @ f.columns()[: n + 1]
    return _real_if_real(f, f._shape_like(out[None])[0])


def rl_integral_grid(beta: float, f: SampledFunction) -> np.ndarray:
    """:func:`rl_integral` at every grid node."""
    if not beta > 0.0:
        raise ValueError("beta must be positive")
    out = _kernels.rl_integral_all(float(beta), f.columns(), f.h)
    return _real_if_real(f, f._shape_like(out))


def _l1_weights(alpha, count):
    j = np.arange(count + 1, dtype=float)
    p = j ** (1.0 - alpha)
    return p[1:] - p[:-1]


def caputo_l1(alpha: float, f: SampledFunction, tau: float):
    """L1 approximation of the Caputo derivative of order 0 < α < 1 at ``tau``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("L1 scheme needs 0 < alpha < 1")
    n = f.index_of(tau)
    vals = f.columns()
    if n == 0:
        return _real_if_real(f, f._shape_like(np.zeros((1, vals.shape[1]), dtype=complex))[0])
    diffs = vals[1 : n + 1] - vals[:n]
    c = _l1_weights(alpha, n)[::-1]
    out = (c @ diffs) * (f.h ** (-alpha) * rgamma(2.0 - alpha))
    return _real_if_real(f, f._shape_like(out[None])[0])


def caputo_l1_grid(alpha: float, f: SampledFunction) -> np.ndarray:
    if not 0.0 < alpha < 1.0:
        raise ValueError("L1 scheme needs 0 < alpha < 1")
    vals = f.columns()
    diffs = vals[1:] - vals[:-1]
    c = _l1_weights(alpha, diffs.shape[0])
    out = _kernels.interval_convolution(c, diffs) * (f.h ** (-alpha) * rgamma(2.0 - alpha))
    return _real_if_real(f, f._shape_like(out))


# ---------------------------------------------------------------------------
# Volterra memory operator
# ---------------------------------------------------------------------------


def _nodal_derivative(vals, h, order):
    for _ in range(order):
        vals = np.gradient(vals, h, axis=0, edge_order=2)
    return vals


def _interval_weights(kernel: MemoryKernel, h: float, count: int) -> np.ndarray:
    """w[i] = ∫ M(Δ) over Δ ∈ [i h, (i+1) h], i = 0..count-1."""
    if kernel.kind == "power_law":
        p = kernel.n - kernel.alpha
        edges = (h * np.arange(count + 1)) ** p
        return (edges[1:] - edges[:-1]) * rgamma(p + 1.0)
    lo = h * np.arange(count)[:, None]
    nodes = lo + 0.5 * h * (_GL_NODES[None, :] + 1.0)
    return 0.5 * h * (kernel(nodes) @ _GL_WEIGHTS)


def volterra_grid(kernel: MemoryKernel, f: SampledFunction) -> np.ndarray:
    """∫_0^τ M(τ-s) f^{(n)}(s) ds at every node.

    f^{(n-1)} is formed with second-order differences and its interval
    differences give a piecewise-constant f^{(n)}; the kernel is integrated
    over each interval (exactly for power laws, 8-point Gauss otherwise).
    An integer-order power law is the plain derivative f^{(n)}.
    """
    vals = f.columns()
    h = f.h
    if kernel.kind == "power_law" and kernel.alpha == kernel.n:
        return _real_if_real(f, f._shape_like(_nodal_derivative(vals, h, kernel.n)))
    lower = _nodal_derivative(vals, h, kernel.n - 1)
    slopes = (lower[1:] - lower[:-1]) / h
    w = _interval_weights(kernel, h, slopes.shape[0])
    out = _kernels.interval_convolution(w, slopes)
    return _real_if_real(f, f._shape_like(out))


def volterra_apply(kernel: MemoryKernel, f: SampledFunction, tau: float):
    n = f.index_of(tau)
    return volterra_grid(kernel, f)[n]


def caputo_grid(alpha: float, f: SampledFunction) -> np.ndarray:
    """Caputo derivative of any order α > 0 at every node (L1 for 0 < α < 1)."""
    if 0.0 < alpha < 1.0:
        return caputo_l1_grid(alpha, f)
    return volterra_grid(MemoryKernel.power_law(alpha), f)


# ---------------------------------------------------------------------------
# Predictor-corrector solver
# ---------------------------------------------------------------------------


def caputo_pc_solve(order, lam, init: InitialState, h: float, t_end: float) -> Trajectory:
    """Adams-Bashforth-Moulton solution of D^α π = Λπ, D^α x = -2π.

    The grid is t_k = k h up to ``t_end``, which must be a multiple of ``h``.
    """
    if not isinstance(order, FractionalOrder):
        order = FractionalOrder(order)
    h = float(h)
    t_end = float(t_end)
    if not (math.isfinite(h) and h > 0.0):
        raise InvalidStep(f"step must be positive, got {h!r}")
    if not (math.isfinite(t_end) and t_end >= h):
        raise InvalidStep(f"t_end must be at least one step, got {t_end!r}")
    steps = int(round(t_end / h))
    if abs(steps * h - t_end) > 1e-9 * t_end:
        raise InvalidStep(f"t_end={t_end} is not a multiple of h={h}")
    init.check(order)
    lam = np.asarray(lam, dtype=complex)
    big = np.zeros((8, 8), dtype=complex)
    big[:4, 4:] = -2.0 * np.eye(4)
    big[4:, 4:] = lam
    taus = h * np.arange(steps + 1)
    y0 = np.concatenate([init.x_derivs, init.pi_derivs], axis=1)  # (n, 8)
    taylor = sum(
        (taus**k / math.factorial(k))[:, None] * y0[k][None, :] for k in range(order.n)
    )
    ys = _kernels.abm_linear(big, taylor, order.alpha, h)
    return Trajectory(taus, ys[:, :4], ys[:, 4:], "oracle")


# ---------------------------------------------------------------------------
# identities
# ---------------------------------------------------------------------------


def left_inverse_residual(beta: float, f: SampledFunction, boundary_layer: float = 0.05) -> float:
    """max |D^β (I^β f) - f| over nodes with τ >= boundary_layer * τ_end.

    I^β is the product-trapezoid integral and D^β the L1 scheme (or the
    Volterra form for β >= 1).  Near τ = 0 the composed error at the k-th node
    depends on k only, not on h, for data with f(0) != 0 (I^β f ~ τ^β), so a
    fixed fraction of the interval next to the origin is excluded.
    """
    if not beta > 0.0:
        raise ValueError("beta must be positive")
    if not 0.0 <= boundary_layer < 1.0:
        raise ValueError("boundary_layer must lie in [0, 1)")
    g = SampledFunction(f.taus, rl_integral_grid(beta, f))
    back = caputo_grid(beta, g)
    diff = np.abs(np.asarray(back) - np.asarray(f.values))
    diff = diff.reshape(diff.shape[0], -1)
    keep = f.taus >= boundary_layer * f.taus[-1]
    if beta >= 1.0:
        # one-sided difference stencils at the right end
        keep[-1] = False
    return float(np.max(diff[keep]))


def integral_identity_residual(alpha, beta, mu, lam, tau) -> float:
    """Relative gap in ∫_0^τ s^{β-1} E_{α,β}(λ s^α) (τ-s)^{μ-1} ds = Γ(μ) τ^{β+μ-1} E_{α,β+μ}(λ τ^α).

    The left side uses QUADPACK's algebraic-weight rule, which absorbs both
    endpoint singularities s^{β-1} and (τ-s)^{μ-1}.
    """
    if not (beta > 0.0 and mu > 0.0 and tau > 0.0):
        raise ValueError("beta, mu and tau must be positive")
    lam = complex(lam)
    inner = MlOrder(alpha, beta)

    def smooth(s):
        return ml_eval(inner, lam * s**alpha)

    opts = dict(weight="alg", wvar=(beta - 1.0, mu - 1.0), epsabs=0.0, epsrel=1e-12, limit=200)
    re, _ = integrate.quad(lambda s: smooth(s).real, 0.0, tau, **opts)
    im, _ = integrate.quad(lambda s: smooth(s).imag, 0.0, tau, **opts)
    lhs = complex(re, im)
    rhs = gamma(mu) * tau ** (beta + mu - 1.0) * ml_eval(MlOrder(alpha, beta + mu), lam * tau**alpha)
    return abs(lhs - rhs) / max(abs(rhs), 1e-300)
