"""Hot loops, each in a numba flavour and a vectorised numpy flavour.

The public wrappers at the bottom pick the flavour through
:func:`fracdirac._accel.use_numba`.  Both flavours implement the same
arithmetic; the test-suite checks that they agree.
"""

from __future__ import annotations

import math

import numpy as np

from . import special
from ._accel import njit, njit_reassoc, use_numba

# ---------------------------------------------------------------------------
# Mittag-Leffler power series in double precision
# ---------------------------------------------------------------------------

# Terms switch from z**k * rgamma(x) to exp(k log|z| - lgamma(x)) past these.
_DIRECT_MAX_ARG = 170.0
_DIRECT_MAX_LOGPOW = 650.0


def _make_series_loop(rgamma_f, lgamma_f):
    def series_loop(alpha, beta, zs, rel_tol, max_terms):
        m = zs.shape[0]
        vals = np.zeros(m, dtype=np.complex128)
        abs_sum = np.zeros(m)
        max_abs = np.zeros(m)
        last_abs = np.zeros(m)
        nterms = np.zeros(m, dtype=np.int64)
        converged = np.zeros(m, dtype=np.bool_)
        # Γ-dependent factors are shared by every z, so they are tabulated
        # once and grown on demand
        size = min(max_terms, 64)
        rg = np.empty(size)
        lg = np.empty(size)
        sg = np.empty(size)
        pole = np.empty(size, dtype=np.bool_)
        filled = 0
        for i in range(m):
            z = zs[i]
            az = abs(z)
            if az == 0.0:
                r0 = rgamma_f(beta)
                vals[i] = r0
                abs_sum[i] = abs(r0)
                max_abs[i] = abs(r0)
                nterms[i] = 1
                converged[i] = True
                continue
            logaz = math.log(az)
            unit = z / az
            peak = az ** (1.0 / alpha)
            pw = 1.0 + 0.0j
            apw = 1.0
            phase = 1.0 + 0.0j
            direct = True
            s = 0.0 + 0.0j
            small = 0
            for k in range(max_terms):
                if k == filled:
                    if k == size:
                        size = min(2 * size, max_terms)
                        rg = np.concatenate((rg, np.empty(size - k)))
                        lg = np.concatenate((lg, np.empty(size - k)))
                        sg = np.concatenate((sg, np.empty(size - k)))
                        pole = np.concatenate((pole, np.empty(size - k, dtype=np.bool_)))
                    xk = alpha * k + beta
                    rg[k] = rgamma_f(xk) if xk <= _DIRECT_MAX_ARG else 0.0
                    lg[k], sg[k] = lgamma_f(xk)
                    pole[k] = xk <= 0.0 and xk == math.floor(xk)
                    filled += 1
                x = alpha * k + beta
                if direct and (x > _DIRECT_MAX_ARG or k * logaz > _DIRECT_MAX_LOGPOW):
                    direct = False
                if direct:
                    t = pw * rg[k]
                    at = apw * abs(rg[k])
                    pw = pw * z
                    apw = apw * az
                elif sg[k] == 0.0:
                    t = 0.0 + 0.0j
                    at = 0.0
                else:
                    at = math.exp(k * logaz - lg[k])
                    t = phase * (sg[k] * at)
                phase = phase * unit
                nterms[i] = k + 1
                if pole[k]:
                    # pole of Γ: zero-weight term, ignored by the stopping rule
                    continue
                s += t
                abs_sum[i] += at
                if at > max_abs[i]:
                    max_abs[i] = at
                last_abs[i] = at
                if at <= rel_tol * abs(s) and x > peak:
                    small += 1
                    if small >= 2:
                        converged[i] = True
                        break
                else:
                    small = 0
            vals[i] = s
        return vals, abs_sum, max_abs, last_abs, nterms, converged

    return series_loop


_series_loop_nb = njit(_make_series_loop(njit(special.rgamma), njit(special.lgamma_sign)))


def _series_numpy(alpha, beta, zs, rel_tol, max_terms):
    zs = np.asarray(zs, dtype=np.complex128)
    m = zs.shape[0]
    vals = np.zeros(m, dtype=np.complex128)
    abs_sum = np.zeros(m)
    max_abs = np.zeros(m)
    last_abs = np.zeros(m)
    nterms = np.zeros(m, dtype=np.int64)
    converged = np.zeros(m, dtype=bool)

    az = np.abs(zs)
    zero = az == 0.0
    r0 = special.rgamma(beta)
    vals[zero] = r0
    abs_sum[zero] = max_abs[zero] = abs(r0)
    nterms[zero] = 1
    converged[zero] = True

    active = ~zero
    safe_az = np.where(zero, 1.0, az)
    logaz = np.log(safe_az)
    unit = np.where(zero, 1.0, zs / safe_az)
    peak = safe_az ** (1.0 / alpha)
    pw = np.ones(m, dtype=np.complex128)
    phase = np.ones(m, dtype=np.complex128)
    direct = np.ones(m, dtype=bool)
    small = np.zeros(m, dtype=np.int64)
    for k in range(max_terms):
        if not active.any():
            break
        x = alpha * k + beta
        direct &= ~((x > _DIRECT_MAX_ARG) | (k * logaz > _DIRECT_MAX_LOGPOW))
        r = special.rgamma(x)
        lg, sg = special.lgamma_sign(x)
        with np.errstate(over="ignore", invalid="ignore"):
            t_log = phase * (sg * np.exp(k * logaz - lg)) if sg != 0.0 else np.zeros(m, complex)
            t = np.where(direct, pw * r, t_log)
            pw = pw * zs
        phase = phase * unit
        nterms[active] = k + 1
        if sg == 0.0:
            continue
        at = np.abs(t)
        vals[active] += t[active]
        abs_sum[active] += at[active]
        max_abs[active] = np.maximum(max_abs[active], at[active])
        last_abs[active] = at[active]
        hit = active & (at <= rel_tol * np.abs(vals)) & (x > peak)
        small = np.where(hit, small + 1, 0)
        done = active & (small >= 2)
        converged |= done
        active &= ~done
    return vals, abs_sum, max_abs, last_abs, nterms, converged


def ml_series_many(alpha, beta, zs, rel_tol, max_terms):
    """Double-precision Mittag-Leffler series for every entry of ``zs``.

    Returns ``(values, abs_sum, max_abs, last_abs, nterms, converged)``.
    """
    zs = np.ascontiguousarray(zs, dtype=np.complex128).ravel()
    if use_numba():
        return _series_loop_nb(float(alpha), float(beta), zs, float(rel_tol), int(max_terms))
    return _series_numpy(float(alpha), float(beta), zs, float(rel_tol), int(max_terms))


# ---------------------------------------------------------------------------
# Adams-Bashforth-Moulton predictor-corrector for D^alpha y = A y
# ---------------------------------------------------------------------------


def _abm_weights(alpha, nsteps):
    i = np.arange(nsteps + 2, dtype=float)
    b = (i[1:] ** alpha - i[:-1] ** alpha)  # b[i] = (i+1)^a - i^a
    p = i ** (alpha + 1.0)
    a = np.empty(nsteps + 1)
    a[: nsteps] = p[2:] + p[:-2] - 2.0 * p[1:-1]  # a[i] = (i+2)^(a+1) + i^(a+1) - 2(i+1)^(a+1)
    a[nsteps] = 0.0
    a0 = np.empty(nsteps + 1)
    k = np.arange(nsteps + 1, dtype=float)
    a0[:] = k ** (alpha + 1.0) - (k - alpha) * (k + 1.0) ** alpha
    return b, a, a0


@njit_reassoc
def _abm_loop_nb(A, taylor_vals, b, a, a0, c_pred, c_corr):
    nsteps = taylor_vals.shape[0] - 1
    d = A.shape[0]
    Y = np.zeros((nsteps + 1, d), dtype=np.complex128)
    # history kept as separate real/imag rows per component: the inner sums
    # then run over contiguous doubles and vectorise
    f_re = np.zeros((d, nsteps + 1))
    f_im = np.zeros((d, nsteps + 1))
    b_rev = b[nsteps::-1].copy()  # b[k-j] == b_rev[nsteps-k+j]
    a_rev = a[nsteps::-1].copy()
    Y[0] = taylor_vals[0]
    f0 = A @ Y[0]
    f_re[:, 0] = f0.real
    f_im[:, 0] = f0.imag
    pred = np.zeros(d, dtype=np.complex128)
    corr = np.zeros(d, dtype=np.complex128)
    for k in range(nsteps):
        ob = nsteps - k
        for q in range(d):
            pr = 0.0
            pi = 0.0
            cr = 0.0
            ci = 0.0
            for j in range(k + 1):
                pr += b_rev[ob + j] * f_re[q, j]
                pi += b_rev[ob + j] * f_im[q, j]
            for j in range(1, k + 1):
                cr += a_rev[ob + j] * f_re[q, j]
                ci += a_rev[ob + j] * f_im[q, j]
            pred[q] = complex(pr, pi)
            corr[q] = a0[k] * complex(f_re[q, 0], f_im[q, 0]) + complex(cr, ci)
        yp = taylor_vals[k + 1] + c_pred * pred
        fp = A @ yp
        Y[k + 1] = taylor_vals[k + 1] + c_corr * (fp + corr)
        fk = A @ Y[k + 1]
        f_re[:, k + 1] = fk.real
        f_im[:, k + 1] = fk.imag
    return Y


def _abm_numpy(A, taylor_vals, b, a, a0, c_pred, c_corr):
    nsteps = taylor_vals.shape[0] - 1
    d = A.shape[0]
    Y = np.zeros((nsteps + 1, d), dtype=np.complex128)
    F = np.zeros((nsteps + 1, d), dtype=np.complex128)
    Y[0] = taylor_vals[0]
    F[0] = A @ Y[0]
    for k in range(nsteps):
        pred = b[k::-1] @ F[: k + 1]
        corr = a0[k] * F[0]
        if k > 0:
            corr = corr + a[k - 1 :: -1][:k] @ F[1 : k + 1]
        yp = taylor_vals[k + 1] + c_pred * pred
        Y[k + 1] = taylor_vals[k + 1] + c_corr * (A @ yp + corr)
        F[k + 1] = A @ Y[k + 1]
    return Y


def abm_linear(A, taylor_vals, alpha, h):
    """Solve ``D^alpha y = A y`` on the grid ``t_k = k h``.

    ``taylor_vals[k]`` holds the initial-value polynomial at ``t_k``.
    """
    A = np.ascontiguousarray(A, dtype=np.complex128)
    taylor_vals = np.ascontiguousarray(taylor_vals, dtype=np.complex128)
    nsteps = taylor_vals.shape[0] - 1
    b, a, a0 = _abm_weights(alpha, nsteps)
    c_pred = h**alpha * special.rgamma(alpha + 1.0)
    c_corr = h**alpha * special.rgamma(alpha + 2.0)
    if use_numba():
        return _abm_loop_nb(A, taylor_vals, b, a, a0, c_pred, c_corr)
    return _abm_numpy(A, taylor_vals, b, a, a0, c_pred, c_corr)


# ---------------------------------------------------------------------------
# Full-grid product-integration operators
# ---------------------------------------------------------------------------


def _rl_node_weights(beta, n):
    """Product-trapezoid weights for the RL integral at node ``n`` (times h^beta/Γ(beta+2))."""
    w = np.empty(n + 1)
    w[n] = 1.0
    if n == 0:
        w[0] = 0.0
        return w
    w[0] = (n - 1.0) ** (beta + 1.0) - (n - 1.0 - beta) * n**beta
    if n > 1:
        m = n - np.arange(1, n, dtype=float)  # n - j for j = 1..n-1
        w[1:n] = (m + 1.0) ** (beta + 1.0) + (m - 1.0) ** (beta + 1.0) - 2.0 * m ** (beta + 1.0)
    return w


def _rl_weights(beta, npts):
    """Product-trapezoid RL weights, in units of h^beta/Γ(beta+2).

    Returns ``(first, inner)``: node ``n`` weighs sample 0 by ``first[n]``,
    sample ``j`` (0 < j < n) by ``inner[n-j]`` and sample ``n`` by 1.
    """
    k = np.arange(npts, dtype=float)
    first = np.zeros(npts)
    first[1:] = (k[1:] - 1.0) ** (beta + 1.0) - (k[1:] - 1.0 - beta) * k[1:] ** beta
    p = np.arange(npts + 1, dtype=float) ** (beta + 1.0)
    inner = np.zeros(npts)
    inner[1:] = p[2:] + p[:-2] - 2.0 * p[1:-1]
    return first, inner


def rl_integral_all(beta, values, h):
    """Product-trapezoid RL integral of order ``beta`` at every grid node."""
    values = np.ascontiguousarray(values, dtype=np.complex128)
    npts = values.shape[0]
    scale = h**beta * special.rgamma(beta + 2.0)
    first, inner = _rl_weights(float(beta), npts)
    out = np.zeros_like(values)
    if npts < 2:
        return out
    out[1:] = first[1:, None] * values[0] + values[1:]
    if npts > 2:
        # inner samples 1..n-1 of node n form a Toeplitz sum over values[1:-1]
        out[2:] += interval_convolution(inner[1:], values[1:-1])[1:]
    return scale * out


@njit_reassoc
def _interval_conv_nb(w_rev, d_re, d_im):
    # out[n, q] = sum_{j<n} w[n-1-j] * diffs[j, q], with w[n-1-j] == w_rev[N-n+j]
    d, ndiff = d_re.shape
    out = np.zeros((ndiff + 1, d), dtype=np.complex128)
    for n in range(1, ndiff + 1):
        off = ndiff - n
        for q in range(d):
            sr = 0.0
            si = 0.0
            for j in range(n):
                sr += w_rev[off + j] * d_re[q, j]
                si += w_rev[off + j] * d_im[q, j]
            out[n, q] = complex(sr, si)
    return out


def _interval_conv_numpy(weights, diffs):
    npts = diffs.shape[0] + 1
    out = np.zeros((npts, diffs.shape[1]), dtype=np.complex128)
    for n in range(1, npts):
        out[n] = weights[n - 1 :: -1] @ diffs[:n]
    return out


def interval_convolution(weights, diffs):
    """Toeplitz history sums used by the L1 scheme at every node."""
    weights = np.ascontiguousarray(weights, dtype=float)
    diffs = np.ascontiguousarray(diffs, dtype=np.complex128)
    if use_numba():
        w_rev = np.ascontiguousarray(weights[: diffs.shape[0]][::-1])
        return _interval_conv_nb(w_rev, np.ascontiguousarray(diffs.real.T), np.ascontiguousarray(diffs.imag.T))
    return _interval_conv_numpy(weights, diffs)
