"""Closed-form trajectories x(τ), π(τ) for D^α π = Λπ, D^α x = -2π.

    π(τ) = Σ_k τ^k E_{α,k+1}(Λτ^α) π^{(k)}(0)
    x(τ) = Σ_k τ^k/k! x^{(k)}(0) - 2 Σ_k τ^{α+k} E_{α,α+k+1}(Λτ^α) π^{(k)}(0)

with k = 0..n-1.  Asymptotic forms work per eigenvalue in modal coordinates
c = N^{-1} v, where N holds the eigenvectors of Λ as columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import InvalidOrder, ValidationError, ZeroEigenvalue
from .field import EigenStructure, FieldConfig, lambda_matrix, modal_decomposition
from .matrix_mlf import matrix_ml_grid
from .mlf import MlOrder, ml_asymptotic, ml_eval_array

__all__ = [
    "METHODS",
    "FractionalOrder",
    "InitialState",
    "Trajectory",
    "solve",
    "solve_pi",
    "solve_x",
    "classical_solution",
    "pi_asymptotic",
    "x_asymptotic",
    "modal_to_physical",
    "to_modal",
    "modal_solution",
]

METHODS = ("exact", "classical", "oracle", "asymptotic")


def derivative_count(alpha: float) -> int:
    """n = floor(alpha) + 1, or alpha itself when alpha is an integer."""
    if alpha == math.floor(alpha):
        return int(alpha)
    return int(math.floor(alpha)) + 1


@dataclass(frozen=True)
class FractionalOrder:
    alpha: float
    n: int | None = None

    def __post_init__(self):
        a = float(self.alpha)
        if not (math.isfinite(a) and a > 0.0):
            raise InvalidOrder(f"alpha must be positive, got {self.alpha!r}")
        n = derivative_count(a)
        if self.n is not None and int(self.n) != n:
            raise InvalidOrder(f"alpha={a} needs n={n}, got n={self.n}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "n", n)


def _vectors(rows, name):
    arr = np.array(rows, dtype=complex)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise ValidationError(f"{name} must be a list of 4-vectors")
    return arr


@dataclass(frozen=True, eq=False)
class InitialState:
    """x^{(k)}(0) and π^{(k)}(0) for k = 0..n-1, stored as (n, 4) complex arrays."""

    x_derivs: np.ndarray
    pi_derivs: np.ndarray

    def __post_init__(self):
        x = _vectors(self.x_derivs, "x_derivs")
        p = _vectors(self.pi_derivs, "pi_derivs")
        if x.shape != p.shape:
            raise ValidationError("x_derivs and pi_derivs must have the same length")
        object.__setattr__(self, "x_derivs", x)
        object.__setattr__(self, "pi_derivs", p)

    @property
    def n(self) -> int:
        return self.x_derivs.shape[0]

    def check(self, order: FractionalOrder) -> None:
        if self.n != order.n:
            raise ValidationError(
                f"alpha={order.alpha} needs n={order.n} initial derivative vectors, got {self.n}"
            )


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples on a τ-grid; ``x`` and ``pi`` have shape (len(taus), 4) or are None."""

    taus: np.ndarray
    x: np.ndarray | None
    pi: np.ndarray | None
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        for arr in (self.x, self.pi):
            if arr is not None and arr.shape != (len(self.taus), 4):
                raise ValueError("sample arrays must have shape (len(taus), 4)")


def _grid(taus):
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if np.any(taus < 0.0) or not np.all(np.isfinite(taus)):
        raise ValueError("τ-grid must be finite and non-negative")
    return taus


def _setup(order, lam, init, eig):
    if not isinstance(order, FractionalOrder):
        order = FractionalOrder(order)
    init.check(order)
    lam = np.asarray(lam)
    if eig is None:
        eig = modal_decomposition(lam)
    return order, eig


def _pi_samples(order, eig, init, taus):
    out = np.zeros((taus.size, 4), dtype=complex)
    for k in range(order.n):
        vals = matrix_ml_grid(MlOrder(order.alpha, k + 1.0), eig, taus, init.pi_derivs[k])
        out += (taus**k)[:, None] * vals
    return out


def _x_samples(order, eig, init, taus):
    out = np.zeros((taus.size, 4), dtype=complex)
    for k in range(order.n):
        out += (taus**k / math.factorial(k))[:, None] * init.x_derivs[k][None, :]
        mlo = MlOrder(order.alpha, order.alpha + k + 1.0)
        vals = matrix_ml_grid(mlo, eig, taus, init.pi_derivs[k])
        out -= 2.0 * (taus ** (order.alpha + k))[:, None] * vals
    return out


def solve(order, lam, init: InitialState, taus, eig: EigenStructure | None = None) -> Trajectory:
    """Both x(τ) and π(τ) on ``taus``."""
    order, eig = _setup(order, lam, init, eig)
    taus = _grid(taus)
    return Trajectory(taus, _x_samples(order, eig, init, taus), _pi_samples(order, eig, init, taus), "exact")


def solve_pi(order, lam, init: InitialState, taus, eig: EigenStructure | None = None) -> Trajectory:
    order, eig = _setup(order, lam, init, eig)
    taus = _grid(taus)
    return Trajectory(taus, None, _pi_samples(order, eig, init, taus), "exact")


def solve_x(order, lam, init: InitialState, taus, eig: EigenStructure | None = None) -> Trajectory:
    order, eig = _setup(order, lam, init, eig)
    taus = _grid(taus)
    return Trajectory(taus, _x_samples(order, eig, init, taus), None, "exact")


def classical_solution(field, init: InitialState, taus) -> Trajectory:
    """α = 1 solution by matrix exponentials.

    π(τ) = e^{Λτ} π(0) and x(τ) = x(0) - 2 ∫_0^τ e^{Λs} ds π(0); the integral
    is the upper-right block of expm([[Λ, I], [0, 0]] τ).  ``field`` is a
    :class:`FieldConfig` or Λ itself.
    """
    lam = lambda_matrix(field) if isinstance(field, FieldConfig) else np.asarray(field)
    init.check(FractionalOrder(1.0))
    taus = _grid(taus)
    block = np.zeros((8, 8), dtype=complex)
    block[:4, :4] = lam
    block[:4, 4:] = np.eye(4)
    x0, p0 = init.x_derivs[0], init.pi_derivs[0]
    xs = np.empty((taus.size, 4), dtype=complex)
    ps = np.empty((taus.size, 4), dtype=complex)
    for i, t in enumerate(taus):
        big = scipy.linalg.expm(block * t)
        ps[i] = big[:4, :4] @ p0
        xs[i] = x0 - 2.0 * (big[:4, 4:] @ p0)
    return Trajectory(taus, xs, ps, "classical")


def modal_solution(order, eig: EigenStructure, init: InitialState, taus) -> tuple[np.ndarray, np.ndarray]:
    """Exact modal components (X, Π) of x and π, each of shape (len(taus), 4).

    Every mode is evaluated on its own, so a decaying mode keeps full relative
    accuracy even when another mode grows by hundreds of orders of magnitude.
    """
    if not isinstance(order, FractionalOrder):
        order = FractionalOrder(order)
    init.check(order)
    eig._require_modal()
    taus = _grid(taus)
    a = order.alpha
    pc = init.pi_derivs @ eig.modal_inv.T
    xc = init.x_derivs @ eig.modal_inv.T
    args = eig.eigenvalues[None, :] * (taus**a)[:, None]
    big_x = np.zeros((taus.size, 4), dtype=complex)
    big_pi = np.zeros((taus.size, 4), dtype=complex)
    for k in range(order.n):
        live = pc[k] != 0  # an unexcited mode stays zero even where E overflows
        e_pi = ml_eval_array(MlOrder(a, k + 1.0), args[:, live])
        e_x = ml_eval_array(MlOrder(a, a + k + 1.0), args[:, live])
        big_pi[:, live] += (taus**k)[:, None] * e_pi * pc[k][None, live]
        big_x += (taus**k / math.factorial(k))[:, None] * xc[k][None, :]
        big_x[:, live] -= 2.0 * (taus ** (a + k))[:, None] * e_x * pc[k][None, live]
    return big_x, big_pi


def _asymptotic_modes(order, eig, modes):
    if not isinstance(order, FractionalOrder):
        order = FractionalOrder(order)
    if not 0.0 < order.alpha < 2.0:
        raise InvalidOrder("asymptotic expansions need 0 < alpha < 2")
    eig._require_modal()
    modes = range(4) if modes is None else [int(s) for s in modes]
    for s in modes:
        if eig.eigenvalues[s] == 0:
            raise ZeroEigenvalue(f"mode {s} has eigenvalue 0; no large-τ expansion")
    return order, list(modes)


def pi_asymptotic(
    order, eig: EigenStructure, init: InitialState, tau: float, m: int, modes: Sequence[int] | None = None
) -> np.ndarray:
    """Large-τ modal components c_s(τ) of π, with π = N c.

    Each c_s = Σ_k τ^k E_{α,k+1}(λ_s τ^α) c_s^{(k)}(0) with the Mittag-Leffler
    factor replaced by its m-term expansion.  Modes not listed in ``modes``
    are returned as NaN.
    """
    order, modes = _asymptotic_modes(order, eig, modes)
    init.check(order)
    coeff = init.pi_derivs @ eig.modal_inv.T
    out = np.full(4, np.nan, dtype=complex)
    for s in modes:
        z = eig.eigenvalues[s] * tau**order.alpha
        out[s] = sum(
            tau**k * ml_asymptotic(MlOrder(order.alpha, k + 1.0), z, m) * coeff[k, s]
            for k in range(order.n)
        )
    return out


def x_asymptotic(
    order, eig: EigenStructure, init: InitialState, tau: float, m: int, modes: Sequence[int] | None = None
) -> np.ndarray:
    """Large-τ modal components of x (x = N c); unlisted modes are NaN."""
    order, modes = _asymptotic_modes(order, eig, modes)
    init.check(order)
    pcoeff = init.pi_derivs @ eig.modal_inv.T
    xcoeff = init.x_derivs @ eig.modal_inv.T
    a = order.alpha
    out = np.full(4, np.nan, dtype=complex)
    for s in modes:
        z = eig.eigenvalues[s] * tau**a
        total = 0j
        for k in range(order.n):
            total += tau**k / math.factorial(k) * xcoeff[k, s]
            total -= 2.0 * tau ** (a + k) * ml_asymptotic(MlOrder(a, a + k + 1.0), z, m) * pcoeff[k, s]
        out[s] = total
    return out


def modal_to_physical(eig: EigenStructure, coeffs) -> np.ndarray:
    """Map modal components back: v = N c."""
    return eig.from_modal(coeffs)


def to_modal(eig: EigenStructure, vectors) -> np.ndarray:
    """Modal components c = N^{-1} v for one vector or a stack of vectors."""
    eig._require_modal()
    return np.asarray(vectors, dtype=complex) @ eig.modal_inv.T
