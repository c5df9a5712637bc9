"""Two-parameter Mittag-Leffler function E_{alpha,beta}(z) for complex z.

Three evaluation routes are combined by :func:`ml_eval`:

* the power series, summed in double precision by a compiled kernel and
  re-summed with mpmath at a working precision sized to the observed
  cancellation when the double sum cannot be trusted;
* the large-|z| expansion with the exponential contribution of every
  admissible root of z (0 < alpha < 2);
* for alpha = 1/2 only, the closed form exp(z^2) erfc(-z), kept separate as an
  oracle (:func:`ml_half_oracle`).
"""

from __future__ import annotations

import cmath
import math
import os
import threading
from dataclasses import dataclass, field
from typing import NamedTuple

import mpmath
import numpy as np

from . import _kernels
from .errors import InvalidOrder, NonConvergence, RegionTooSmall
from .special import erfcx_neg, lgamma_sign, rgamma

__all__ = [
    "DISPATCH_RADIUS",
    "CANCELLATION_RADIUS",
    "ASYMPTOTIC_MIN_RADIUS",
    "MlOrder",
    "SeriesControl",
    "MlResult",
    "sector_angle",
    "precision_mode",
    "ml_series",
    "ml_asymptotic",
    "ml_eval",
    "ml_eval_array",
    "ml_half_oracle",
]

DISPATCH_RADIUS = 20.0
CANCELLATION_RADIUS = 5.0
# ml_asymptotic refuses smaller |z|; ml_eval itself only switches above DISPATCH_RADIUS
ASYMPTOTIC_MIN_RADIUS = 10.0

_EPS = 2.220446049250313e-16
# relative accuracy ml_eval aims for before it escalates or switches route
_TARGET = 1e-13
_MAX_DPS = 1500
_ASYMPTOTIC_MAX_TERMS = 400


def precision_mode() -> str:
    """``"auto"`` (default), ``"standard"`` or ``"extended"`` from FRACDIRAC_PRECISION."""
    mode = os.environ.get("FRACDIRAC_PRECISION", "").strip().lower()
    if mode in ("standard", "extended"):
        return mode
    return "auto"


@dataclass(frozen=True)
class MlOrder:
    alpha: float
    beta: float = 1.0

    def __post_init__(self):
        a = float(self.alpha)
        b = float(self.beta)
        if not (math.isfinite(a) and a > 0.0):
            raise InvalidOrder(f"alpha must be positive, got {self.alpha!r}")
        if not math.isfinite(b):
            raise InvalidOrder(f"beta must be finite, got {self.beta!r}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)


@dataclass(frozen=True)
class SeriesControl:
    rel_tol: float = 1e-15
    max_terms: int = 10000
    precision_escalation: bool = field(default_factory=lambda: precision_mode() != "standard")

    def __post_init__(self):
        if not self.rel_tol > 0.0:
            raise ValueError("rel_tol must be positive")
        if int(self.max_terms) < 1:
            raise ValueError("max_terms must be at least 1")


class MlResult(NamedTuple):
    value: complex
    error: float
    method: str
    terms: int


def sector_angle(alpha: float) -> float:
    """Half-opening of the sector in which the exponential term is kept."""
    return 0.5 * (0.5 * math.pi * alpha + min(math.pi, math.pi * alpha))


def _as_order(order, beta=None) -> MlOrder:
    if isinstance(order, MlOrder):
        return order
    return MlOrder(order, 1.0 if beta is None else beta)


# ---------------------------------------------------------------------------
# power series
# ---------------------------------------------------------------------------

_rgamma_tables: dict = {}
_rgamma_lock = threading.Lock()


def _mp_rgamma_table(alpha: float, beta: float, dps: int, size: int) -> list:
    key = (alpha, beta, dps)
    with _rgamma_lock:
        table = _rgamma_tables.get(key)
        if table is None:
            table = _rgamma_tables[key] = []
        if len(table) < size:
            with mpmath.workdps(dps):
                a = mpmath.mpf(alpha)
                b = mpmath.mpf(beta)
                for k in range(len(table), size):
                    table.append(mpmath.rgamma(a * k + b))
        return table


def _series_mp(alpha, beta, z, dps, max_terms):
    """Series summed with mpmath at ``dps`` digits.

    Returns ``(sum, max|term|, n_terms)``; the sum is an mpc at ``dps``.
    """
    with mpmath.workdps(dps):
        zz = mpmath.mpc(z.real, z.imag)
        tol = mpmath.mpf(10) ** (-20)
        peak = abs(z) ** (1.0 / alpha)
        s = mpmath.mpc(0)
        pw = mpmath.mpc(1)
        max_abs = mpmath.mpf(0)
        small = 0
        chunk = 64
        table = _mp_rgamma_table(alpha, beta, dps, chunk)
        for k in range(max_terms):
            if k >= len(table):
                table = _mp_rgamma_table(alpha, beta, dps, len(table) + chunk)
            r = table[k]
            t = pw * r
            pw *= zz
            if r == 0:
                continue
            at = abs(t)
            s += t
            if at > max_abs:
                max_abs = at
            if at <= tol * abs(s) and alpha * k + beta > peak:
                small += 1
                if small >= 2:
                    return s, max_abs, k + 1
            else:
                small = 0
    raise NonConvergence(f"series did not converge in {max_terms} terms (z={z!r})")


def _series_extended(alpha, beta, z, max_terms, lost_guess):
    dps = max(30, int(lost_guess) + 25)
    while True:
        if dps > _MAX_DPS:
            raise NonConvergence(
                f"series needs more than {_MAX_DPS} digits at z={z!r}, alpha={alpha}"
            )
        s, max_abs, n = _series_mp(alpha, beta, z, dps, max_terms)
        with mpmath.workdps(dps):
            mag = abs(s)
            lost = float(mpmath.log10(max_abs / mag)) if mag > 0 else float(dps)
        if dps >= lost + 20:
            value = complex(s)
            err = abs(value) * 10.0 ** (lost - dps) + 4 * _EPS * abs(value)
            return MlResult(value, err, "series-extended", n)
        dps = int(lost) + 30


def _series_double(alpha, beta, zs, rel_tol, max_terms):
    vals, abs_sum, max_abs, last_abs, nterms, converged = _kernels.ml_series_many(
        alpha, beta, zs, rel_tol, max_terms
    )
    err = 2.0 * _EPS * abs_sum + last_abs
    return vals, err, max_abs, nterms, converged


def _needs_escalation(value, err, z, force_zone):
    if force_zone and z.real < 0.0 and CANCELLATION_RADIUS < abs(z) <= DISPATCH_RADIUS:
        return True
    return err > _TARGET * abs(value)


def ml_series(order, z, ctrl: SeriesControl | None = None, *, full_output=False):
    """Sum ``sum_k z**k / Gamma(alpha*k + beta)``.

    Terms with Γ at a pole carry zero weight and are skipped.  The sum stops
    once two consecutive terms past the peak are below ``rel_tol`` times the
    partial sum.  With ``ctrl.precision_escalation`` the sum is redone in
    extended precision when the double-precision rounding estimate exceeds
    about 1e-13 relative.  With ``full_output=True`` an :class:`MlResult`
    carrying the error estimate is returned.
    """
    order = _as_order(order)
    ctrl = ctrl or SeriesControl()
    z = complex(z)
    if z == 0:
        res = MlResult(complex(rgamma(order.beta)), 0.0, "series", 1)
        return res if full_output else res.value
    res = _series_one(order.alpha, order.beta, z, ctrl, force_zone=precision_mode() == "extended")
    return res if full_output else res.value


def _series_one(alpha, beta, z, ctrl, force_zone=False):
    vals, err, max_abs, nterms, conv = _series_double(
        alpha, beta, np.array([z]), ctrl.rel_tol, ctrl.max_terms
    )
    if not conv[0]:
        raise NonConvergence(
            f"series did not converge in {ctrl.max_terms} terms (z={z!r}, alpha={alpha})"
        )
    value = complex(vals[0])
    res = MlResult(value, float(err[0]), "series", int(nterms[0]))
    if ctrl.precision_escalation and _needs_escalation(value, res.error, z, force_zone):
        return _series_extended(alpha, beta, z, ctrl.max_terms, _lost_digits(max_abs[0], value))
    return res


def _lost_digits(max_abs, value):
    mag = abs(value)
    if mag == 0.0 or max_abs == 0.0:
        return 17.0
    return max(0.0, math.log10(max_abs / mag)) + 17.0 * (max_abs * _EPS > mag)


# ---------------------------------------------------------------------------
# large-|z| expansion
# ---------------------------------------------------------------------------


def _at_pole(x: float) -> bool:
    """x is a non-positive integer up to the rounding of beta - alpha*j."""
    return x <= 0.5 and abs(x - round(x)) <= 64.0 * _EPS * max(1.0, abs(x))


def _algebraic_term(alpha, beta, logz, j):
    """``z**(-j) / Gamma(beta - alpha*j)`` with logz = Log z."""
    x = beta - alpha * j
    if _at_pole(x):
        return 0.0j
    if abs(x) < 150.0:
        return cmath.exp(-j * logz) * rgamma(x)
    lg, sg = lgamma_sign(x)
    return sg * cmath.exp(-j * logz - lg)


def ml_asymptotic(order, z, m: int) -> complex:
    """Large-|z| expansion truncated after ``m`` algebraic terms.

    For ``|arg z| <= m0`` the principal-branch exponential term
    ``z**((1-beta)/alpha) exp(z**(1/alpha)) / alpha`` is included; outside that
    sector only the algebraic tail ``-sum_{j=1}^m z**(-j)/Gamma(beta-alpha*j)``
    remains.  ``m0`` is the midpoint of (pi*alpha/2, min(pi, pi*alpha)).
    """
    order = _as_order(order)
    alpha, beta = order.alpha, order.beta
    if not 0.0 < alpha < 2.0:
        raise InvalidOrder(f"asymptotic expansion needs 0 < alpha < 2, got {alpha}")
    if int(m) < 1:
        raise ValueError("m must be a positive integer")
    z = complex(z)
    if abs(z) < ASYMPTOTIC_MIN_RADIUS:
        raise RegionTooSmall(f"|z| = {abs(z):.6g} is below {ASYMPTOTIC_MIN_RADIUS}; use the series")
    logz = cmath.log(z)
    total = 0.0j
    if abs(cmath.phase(z)) <= sector_angle(alpha):
        total += _cexp((1.0 - beta) / alpha * logz + cmath.exp(logz / alpha) - math.log(alpha))
    for j in range(1, int(m) + 1):
        total -= _algebraic_term(alpha, beta, logz, j)
    return total


def _cexp(w: complex) -> complex:
    """exp(w) that saturates to a signed complex infinity instead of raising."""
    try:
        return cmath.exp(w)
    except OverflowError:
        c, s = math.cos(w.imag), math.sin(w.imag)
        re = math.copysign(math.inf, c) if c != 0.0 else 0.0
        im = math.copysign(math.inf, s) if s != 0.0 else 0.0
        return complex(re, im)


def _exponential_part(alpha, beta, z):
    """Sum of exp(zeta) zeta**(1-beta) / alpha over roots zeta of zeta**alpha = z
    with |arg zeta| < pi (half weight on the boundary), plus an estimate of the
    Stokes ambiguity."""
    theta = cmath.phase(z)
    logr = math.log(abs(z))
    total = 0.0j
    lim = alpha * math.pi
    for n in (-1, 0, 1):
        th = theta + 2.0 * math.pi * n
        if abs(th) > lim * (1.0 + 1e-13):
            continue
        weight = 0.5 if abs(abs(th) - lim) <= 1e-13 * lim else 1.0
        logzeta = complex(logr / alpha, th / alpha)
        total += _cexp((1.0 - beta) * logzeta + cmath.exp(logzeta) + math.log(weight / alpha))
    return total


def _asymptotic_auto(alpha, beta, z):
    """Expansion with optimal truncation; returns an MlResult with an error bound."""
    logz = cmath.log(z)
    exp_part = _exponential_part(alpha, beta, z)
    terminating = alpha == 1.0 and beta == math.floor(beta)
    tail = 0.0j
    prev = math.inf
    err = 0.0
    used = 0
    small = 0
    for j in range(1, _ASYMPTOTIC_MAX_TERMS + 1):
        if terminating and beta - j <= 0.0:
            err = 0.0
            break
        t = _algebraic_term(alpha, beta, logz, j)
        at = abs(t)
        if at == 0.0:
            continue
        if at > prev:
            # optimal truncation; 1/Γ is not monotone, so charge the first omitted term
            err = at
            break
        tail -= t
        used = j
        prev = at
        err = at
        small = small + 1 if at <= 1e-18 * abs(exp_part - tail) else 0
        if small >= 2:
            break
    value = exp_part + tail
    if not terminating:
        # a subdominant exponential can switch on across a Stokes line
        r = abs(z) ** (1.0 / alpha)
        err += math.exp(-r + (1.0 - beta) * math.log(r)) / alpha
    if cmath.isnan(value):
        err = math.inf
    elif cmath.isinf(value):
        # the dominant exponential alone overflows double precision
        err = 0.0
    return MlResult(value, err, "asymptotic", used)


# ---------------------------------------------------------------------------
# dispatcher
# ---------------------------------------------------------------------------


def _certified(res: MlResult) -> bool:
    return math.isfinite(res.error) and res.error <= _TARGET * abs(res.value)


def _eval_scalar(alpha, beta, z, double_res=None):
    res = _route(alpha, beta, z, double_res)
    # E_{alpha,beta} is real on the real axis; drop rounding noise from complex logs
    if z.imag == 0.0 and res.value.imag != 0.0:
        res = res._replace(value=complex(res.value.real, 0.0))
    return res


def _route(alpha, beta, z, double_res):
    mode = precision_mode()
    escalate = mode != "standard"
    force_zone = mode == "extended" or mode == "auto"
    ctrl = SeriesControl(precision_escalation=escalate)
    if z == 0:
        return MlResult(complex(rgamma(beta)), 0.0, "series", 1)
    can_asym = 0.0 < alpha < 2.0
    if abs(z) <= DISPATCH_RADIUS:
        res = double_res
        if res is None:
            vals, err, max_abs, nterms, conv = _series_double(
                alpha, beta, np.array([z]), ctrl.rel_tol, ctrl.max_terms
            )
            if not conv[0]:
                return _unconverged(alpha, beta, z, can_asym)
            res = (MlResult(complex(vals[0]), float(err[0]), "series", int(nterms[0])), max_abs[0])
        dres, max_abs = res
        if not escalate or not _needs_escalation(dres.value, dres.error, z, force_zone):
            return dres
        if can_asym:
            ares = _asymptotic_auto(alpha, beta, z)
            if _certified(ares):
                return ares
        return _series_extended(alpha, beta, z, ctrl.max_terms, _lost_digits(max_abs, dres.value))
    ares = _asymptotic_auto(alpha, beta, z) if can_asym else None
    if ares is not None and (_certified(ares) or not escalate):
        return ares
    try:
        return _series_one(alpha, beta, z, ctrl)
    except NonConvergence:
        if ares is not None:
            return ares
        raise


def _unconverged(alpha, beta, z, can_asym):
    if can_asym:
        ares = _asymptotic_auto(alpha, beta, z)
        if _certified(ares):
            return ares
    raise NonConvergence(f"series did not converge (z={z!r}, alpha={alpha}, beta={beta})")


def ml_eval(order, z, *, full_output=False):
    """E_{alpha,beta}(z) with automatic choice of series or expansion.

    For |z| <= 20 the series is used, re-summed in extended precision when
    cancellation is detected (always for Re z < 0, 5 < |z| <= 20), unless the
    large-|z| expansion already certifies ~1e-13 accuracy.  For |z| > 20 the
    expansion is used when 0 < alpha < 2 and its error bound is small enough,
    otherwise the series.
    """
    order = _as_order(order)
    res = _eval_scalar(order.alpha, order.beta, complex(z))
    return res if full_output else res.value


def ml_eval_array(order, zs) -> np.ndarray:
    """Vectorised :func:`ml_eval`; the double-precision series runs in one kernel call."""
    order = _as_order(order)
    zs = np.asarray(zs, dtype=np.complex128)
    flat = zs.ravel()
    out = np.empty(flat.shape, dtype=np.complex128)
    inner = np.abs(flat) <= DISPATCH_RADIUS
    idx = np.nonzero(inner)[0]
    ctrl = SeriesControl()
    if idx.size:
        vals, err, max_abs, nterms, conv = _series_double(
            order.alpha, order.beta, flat[idx], ctrl.rel_tol, ctrl.max_terms
        )
        for p, i in enumerate(idx):
            if not conv[p]:
                out[i] = _unconverged(order.alpha, order.beta, complex(flat[i]), 0.0 < order.alpha < 2.0).value
                continue
            pre = (MlResult(complex(vals[p]), float(err[p]), "series", int(nterms[p])), max_abs[p])
            out[i] = _eval_scalar(order.alpha, order.beta, complex(flat[i]), pre).value
    for i in np.nonzero(~inner)[0]:
        out[i] = _eval_scalar(order.alpha, order.beta, complex(flat[i])).value
    return out.reshape(zs.shape)


def ml_half_oracle(z) -> complex:
    """E_{1/2,1}(z) = exp(z**2) erfc(-z), independent of the series code."""
    return complex(erfcx_neg(complex(z)))
