"""Matrix-argument Mittag-Leffler functions E_{alpha,beta}(Λ t^alpha) and propagators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import NonConvergence, NotDiagonalizable
from .field import EigenStructure, modal_decomposition
from .mlf import MlOrder, SeriesControl, _as_order, ml_eval_array
from .special import lgamma_sign, rgamma

__all__ = [
    "Propagator",
    "matrix_ml_series",
    "matrix_ml_eigen",
    "matrix_ml",
    "matrix_ml_grid",
    "propagator",
    "semigroup_defect",
    "semigroup_scale",
]

_EPS = 2.220446049250313e-16
_MAX_DPS = 400


@dataclass(frozen=True, eq=False)
class Propagator:
    alpha: float
    tau: float
    matrix: np.ndarray


def _check_t(t):
    t = float(t)
    if not (t >= 0.0 and math.isfinite(t)):
        raise ValueError(f"t must be finite and non-negative, got {t!r}")
    return t


def _series_double(alpha, beta, m, ctrl):
    """Sum of m^k/Γ(alpha k + beta); returns (sum, rounding estimate, terms)."""
    n = m.shape[0]
    total = np.eye(n, dtype=complex) * rgamma(beta)
    # powers of m are carried as unit-norm matrix times exp(log_scale)
    power = np.eye(n, dtype=complex) / math.sqrt(n)
    log_scale = 0.5 * math.log(n)
    abs_sum = np.linalg.norm(total)
    peak = np.linalg.norm(m) ** (1.0 / alpha)
    small = 0
    for k in range(1, ctrl.max_terms):
        power = power @ m
        pn = np.linalg.norm(power)
        if pn == 0.0:
            return total, 4.0 * _EPS * abs_sum, k
        power /= pn
        log_scale += math.log(pn)
        lg, sg = lgamma_sign(alpha * k + beta)
        if sg == 0.0:
            continue
        log_tn = log_scale - lg
        if log_tn > 709.0:
            raise NonConvergence("matrix series terms overflow; use the eigen path")
        tn = math.exp(log_tn)
        total = total + (sg * tn) * power
        abs_sum += tn
        if tn <= ctrl.rel_tol * np.linalg.norm(total) and alpha * k + beta > peak:
            small += 1
            if small >= 2:
                return total, 4.0 * _EPS * abs_sum + tn, k + 1
        else:
            small = 0
    raise NonConvergence(
        f"matrix series did not converge in {ctrl.max_terms} terms; use the eigen path"
    )


def _series_extended(alpha, beta, m, ctrl, dps):
    n = m.shape[0]
    with mpmath.workdps(dps):
        mm = mpmath.matrix([[mpmath.mpc(complex(v).real, complex(v).imag) for v in row] for row in m])
        power = mpmath.eye(n)
        total = power * mpmath.rgamma(beta)
        peak = np.linalg.norm(m) ** (1.0 / alpha)
        tol = mpmath.mpf(10) ** (-20)
        small = 0
        for k in range(1, ctrl.max_terms):
            power = power * mm
            pn = mpmath.mnorm(power, "F")
            if pn == 0:
                break
            r = mpmath.rgamma(mpmath.mpf(alpha) * k + beta)
            if r == 0:
                continue
            total += power * r
            if pn * abs(r) <= tol * mpmath.mnorm(total, "F") and alpha * k + beta > peak:
                small += 1
                if small >= 2:
                    break
            else:
                small = 0
        else:
            raise NonConvergence("extended matrix series did not converge")
        return np.array([[complex(total[i, j]) for j in range(n)] for i in range(n)])


def matrix_ml_series(order, lam, t, ctrl: SeriesControl | None = None) -> np.ndarray:
    """``sum_k t**(alpha k) Λ**k / Γ(alpha k + beta)`` summed directly.

    Stops when the Frobenius norm of two consecutive terms past the peak is
    below ``rel_tol`` times the partial sum, or as soon as a power of Λ
    vanishes (nilpotent Λ).  Cancellation beyond ~1e-14 triggers an mpmath
    re-summation when ``ctrl.precision_escalation`` is set.
    """
    order = _as_order(order)
    ctrl = ctrl or SeriesControl()
    t = _check_t(t)
    lam = np.asarray(lam, dtype=complex)
    m = lam * t**order.alpha
    total, err, _ = _series_double(order.alpha, order.beta, m, ctrl)
    norm = np.linalg.norm(total)
    if ctrl.precision_escalation and err > 1e-14 * norm:
        # the double sum may be pure noise, so the digit count is re-checked
        # against the extended result until it covers the cancellation
        peak = max(err / (4.0 * _EPS), 1e-300)
        dps = int(math.log10(peak / max(norm, 1e-300))) + 30
        while True:
            if dps > _MAX_DPS:
                raise NonConvergence("matrix series cancellation too severe; use the eigen path")
            total = _series_extended(order.alpha, order.beta, m, ctrl, dps)
            need = int(math.log10(peak / max(np.linalg.norm(total), 1e-300))) + 30
            if need <= dps:
                break
            dps = need
    return total


def _realify(result, lam):
    # E(Λ t^alpha) is real for real Λ; drop the rounding-level imaginary part
    if not np.iscomplexobj(lam) or not np.any(np.imag(lam)):
        return np.real(result).astype(complex)
    return result


def matrix_ml_eigen(order, eig: EigenStructure, t) -> np.ndarray:
    """``N diag(E_{alpha,beta}(λ_s t**alpha)) N^{-1}``."""
    order = _as_order(order)
    if not eig.diagonalizable:
        raise NotDiagonalizable("Λ is not diagonalizable; use matrix_ml_series")
    t = _check_t(t)
    vals = ml_eval_array(order, eig.eigenvalues * t**order.alpha)
    return _realify((eig.modal * vals) @ eig.modal_inv, eig.lam)


def matrix_ml(order, lam, t, eig: EigenStructure | None = None) -> np.ndarray:
    """Eigen path when Λ is diagonalizable, series otherwise."""
    if eig is None:
        eig = modal_decomposition(lam)
    if eig.diagonalizable:
        return matrix_ml_eigen(order, eig, t)
    return matrix_ml_series(order, lam, t)


def matrix_ml_grid(order, eig: EigenStructure, ts, vec) -> np.ndarray:
    """``E_{alpha,beta}(Λ t**alpha) @ vec`` for every t in ``ts``; shape (len(ts), 4)."""
    order = _as_order(order)
    ts = np.asarray(ts, dtype=float)
    vec = np.asarray(vec, dtype=complex)
    if eig.diagonalizable:
        args = eig.eigenvalues[None, :] * (ts**order.alpha)[:, None]
        vals = ml_eval_array(order, args)
        coeff = eig.modal_inv @ vec
        out = (vals * coeff[None, :]) @ eig.modal.T
        if not np.any(vec.imag):
            out = _realify(out, eig.lam)
    else:
        out = np.array([matrix_ml_series(order, eig.lam, t) @ vec for t in ts]).reshape(ts.size, -1)
    # E_{alpha,beta}(0) = I/Γ(beta) exactly
    out[ts == 0.0] = vec * rgamma(order.beta)
    return out


def propagator(alpha, lam, tau, eig: EigenStructure | None = None) -> Propagator:
    """Φ_tau = E_alpha(Λ tau**alpha); exactly the identity at tau = 0."""
    order = MlOrder(alpha, 1.0)
    tau = _check_t(tau)
    lam = np.asarray(lam)
    if tau == 0.0:
        return Propagator(order.alpha, 0.0, np.eye(lam.shape[0], dtype=complex))
    return Propagator(order.alpha, tau, matrix_ml(order, lam, tau, eig))


def semigroup_defect(alpha, lam, tau, s, eig: EigenStructure | None = None) -> float:
    """‖Φ_tau Φ_s - Φ_{tau+s}‖_F."""
    if eig is None:
        eig = modal_decomposition(lam)
    p_tau = propagator(alpha, lam, tau, eig).matrix
    p_s = propagator(alpha, lam, s, eig).matrix
    p_sum = propagator(alpha, lam, float(tau) + float(s), eig).matrix
    return float(np.linalg.norm(p_tau @ p_s - p_sum))


def semigroup_scale(alpha, lam, tau, s, eig: EigenStructure | None = None) -> float:
    """max(1, ‖Φ_tau‖_F ‖Φ_s‖_F): the size rounding errors in the product scale with."""
    if eig is None:
        eig = modal_decomposition(lam)
    n_tau = np.linalg.norm(propagator(alpha, lam, tau, eig).matrix)
    n_s = np.linalg.norm(propagator(alpha, lam, s, eig).matrix)
    return max(1.0, float(n_tau * n_s))
