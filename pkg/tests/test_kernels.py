"""numba and numpy kernels must agree; both are exercised regardless of FRACDIRAC_NUMBA."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracdirac import _accel, _kernels, special

pytestmark = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


def both(fn, *args):
    with _accel.backend("numba"):
        a = fn(*args)
    with _accel.backend("numpy"):
        b = fn(*args)
    return a, b


@settings(max_examples=40, deadline=None)
@given(
    alpha=st.floats(0.4, 2.5),
    beta=st.floats(-1.5, 3.0),
    re=st.floats(-8, 8),
    im=st.floats(-8, 8),
)
def test_series_backends_agree(alpha, beta, re, im):
    zs = np.array([complex(re, im), 0.0, complex(im, -re) / 3])
    nb, npy = both(_kernels.ml_series_many, alpha, beta, zs, 1e-15, 10000)
    np.testing.assert_array_equal(nb[5], npy[5])
    ok = nb[5]
    scale = np.maximum(nb[1], 1e-300)
    assert np.all(np.abs(nb[0] - npy[0])[ok] <= 1e-13 * scale[ok])
    # stopping points only coincide when the double sum is well conditioned
    good = ok & (1e-10 * nb[1] < np.abs(nb[0]))
    np.testing.assert_allclose(nb[4][good], npy[4][good], atol=2)


def test_series_zero_argument_is_first_term():
    for beta in (1.0, 2.0, 0.5, -1.0):
        vals = _kernels.ml_series_many(0.7, beta, np.zeros(1), 1e-15, 100)[0]
        assert vals[0] == special.rgamma(beta)


def test_abm_backends_agree():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    taylor = np.tile(rng.normal(size=3) + 0j, (301, 1))
    nb, npy = both(_kernels.abm_linear, A, taylor, 0.6, 1e-2)
    assert nb.shape == (301, 3)
    np.testing.assert_allclose(nb, npy, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("beta", [0.4, 1.0, 1.7])
def test_rl_backends_agree(beta):
    t = np.linspace(0.0, 1.0, 201)
    vals = np.stack([np.cos(t), t**2 + 1j * t], axis=1)
    nb, npy = both(_kernels.rl_integral_all, beta, vals, t[1])
    np.testing.assert_allclose(nb, npy, rtol=1e-12, atol=1e-14)
    assert np.all(nb[0] == 0)


def test_rl_matches_per_node_weights():
    t = np.linspace(0.0, 1.0, 41)
    vals = np.stack([np.exp(t), 1j * t**3], axis=1)
    got = _kernels.rl_integral_all(0.6, vals, t[1])
    scale = t[1] ** 0.6 * special.rgamma(2.6)
    for n in (1, 2, 17, 40):
        ref = scale * (_kernels._rl_node_weights(0.6, n) @ vals[: n + 1])
        np.testing.assert_allclose(got[n], ref, rtol=1e-13)


def test_interval_convolution_backends_agree():
    rng = np.random.default_rng(1)
    w = rng.uniform(size=50)
    d = rng.normal(size=(50, 2)) + 0j
    nb, npy = both(_kernels.interval_convolution, w, d)
    np.testing.assert_allclose(nb, npy, rtol=1e-13, atol=1e-14)
    assert nb[3, 0] == pytest.approx(w[2] * d[0, 0] + w[1] * d[1, 0] + w[0] * d[2, 0])


def test_backend_switch_restores_previous():
    before = _accel.use_numba()
    with _accel.backend("numpy"):
        assert not _accel.use_numba()
    assert _accel.use_numba() == before
    with pytest.raises(ValueError):
        _accel.set_backend("fortran")


@pytest.mark.parametrize("x", [1.0, 2.0, 5.0, 0.5, -0.5, -2.5, 1e-3, 170.5, -170.3])
def test_gamma_helpers(x):
    assert special.rgamma(x) == pytest.approx(1.0 / math.gamma(x), rel=1e-14)
    lg, sgn = special.lgamma_sign(x)
    assert lg == pytest.approx(math.lgamma(x), rel=1e-14, abs=1e-14)
    assert sgn == math.copysign(1.0, math.gamma(x))


def test_gamma_poles_and_overflow():
    for x in (0.0, -1.0, -7.0):
        assert special.rgamma(x) == 0.0
        assert special.lgamma_sign(x) == (math.inf, 0.0)
        assert math.isnan(special.gamma(x))
    assert special.rgamma(200.0) == 0.0
    assert special.gamma(200.0) == math.inf
    assert special.rgamma(1.0) == 1.0 and special.rgamma(4.0) == 1.0 / 6.0


def test_erfcx_neg_matches_definition():
    assert special.erfcx_neg(0.0) == pytest.approx(1.0)
    assert special.erfcx_neg(-1.0) == pytest.approx(math.e * math.erfc(1.0), rel=1e-14)
    assert special.erfcx_neg(-2.0) == pytest.approx(math.exp(4.0) * math.erfc(2.0), rel=1e-13)
