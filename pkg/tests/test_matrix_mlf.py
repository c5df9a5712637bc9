import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from fracdirac import FieldConfig, MlOrder, NotDiagonalizable, lambda_matrix, modal_decomposition
from fracdirac import matrix_ml_eigen, matrix_ml_series, ml_half_oracle, propagator, semigroup_defect
from fracdirac.matrix_mlf import matrix_ml, matrix_ml_grid, semigroup_scale
from fracdirac.numerics import SampledFunction, caputo_l1_grid

PURE_B = lambda_matrix(FieldConfig((0, 0, 0), (0, 0, 1), 1.0))
PURE_E = lambda_matrix(FieldConfig((1, 0, 0), (0, 0, 0), 1.0))
NULL = lambda_matrix(FieldConfig((1, 0, 0), (0, 1, 0), 1.0))
SCALAR = np.diag([-1.0, 0.0, 0.0, 0.0])

comp = st.floats(-1.5, 1.5, allow_nan=False)
fields = st.builds(FieldConfig, st.tuples(comp, comp, comp), st.tuples(comp, comp, comp), st.sampled_from([-1.0, 1.0]))


def test_series_of_zero_matrix():
    for alpha, beta in ((0.5, 1.0), (1.3, 2.5), (2.0, 0.7)):
        got = matrix_ml_series(MlOrder(alpha, beta), np.zeros((4, 4)), 3.0)
        np.testing.assert_allclose(got, np.eye(4) / math.gamma(beta), rtol=1e-15)


def test_series_terminates_on_nilpotent_matrix():
    got = matrix_ml_series(MlOrder(0.5, 1.0), NULL, 1.0)
    expected = np.eye(4) + NULL / math.gamma(1.5) + NULL @ NULL / math.gamma(2.0)
    np.testing.assert_allclose(got, expected, rtol=0, atol=1e-15)


def test_series_pure_b_is_rotation():
    got = matrix_ml_series(MlOrder(1.0, 1.0), PURE_B, 1.0)
    c, s = math.cos(2.0), math.sin(2.0)
    np.testing.assert_allclose(got[1:3, 1:3], [[c, -s], [s, c]], atol=1e-14)
    np.testing.assert_allclose(got[[0, 3], [0, 3]], 1.0, atol=1e-15)


def test_eigen_path_diagonal_matrix():
    lam = np.diag([-1.0, 0.5, 2.0, -3.0])
    got = matrix_ml_eigen(MlOrder(1.0), modal_decomposition(lam), 0.7)
    np.testing.assert_allclose(got, np.diag(np.exp(np.diag(lam) * 0.7)), rtol=1e-14, atol=1e-16)


def test_eigen_matches_series_pure_b():
    eig = modal_decomposition(PURE_B)
    diff = matrix_ml_eigen(MlOrder(0.5), eig, 1.0) - matrix_ml_series(MlOrder(0.5), PURE_B, 1.0)
    assert np.linalg.norm(diff) <= 1e-10


def test_eigen_matches_extended_series_pure_e():
    eig = modal_decomposition(PURE_E)
    diff = matrix_ml_eigen(MlOrder(0.7), eig, 2.0) - matrix_ml_series(MlOrder(0.7), PURE_E, 2.0)
    assert np.linalg.norm(diff) <= 1e-8


def test_eigen_path_refuses_nilpotent():
    with pytest.raises(NotDiagonalizable):
        matrix_ml_eigen(MlOrder(0.5), modal_decomposition(NULL), 1.0)
    # the dispatcher falls back to the series
    np.testing.assert_allclose(matrix_ml(MlOrder(0.5), NULL, 1.0), matrix_ml_series(MlOrder(0.5), NULL, 1.0))


def test_propagator_examples():
    assert np.array_equal(propagator(0.5, PURE_B, 0.0).matrix, np.eye(4))
    np.testing.assert_allclose(propagator(1.0, PURE_E, 1.3).matrix, scipy.linalg.expm(1.3 * PURE_E), rtol=1e-13)
    for tau in (0.25, 1.0, 4.0):
        entry = propagator(0.5, SCALAR, tau).matrix[0, 0]
        assert entry == pytest.approx(ml_half_oracle(-math.sqrt(tau)), rel=1e-12)


def test_semigroup_examples():
    assert semigroup_defect(1.0, PURE_E, 1.0, 1.0) <= 1e-12 * np.linalg.norm(scipy.linalg.expm(PURE_E)) ** 2
    ref = abs(ml_half_oracle(-1.0) ** 2 - ml_half_oracle(-math.sqrt(2.0)))
    assert semigroup_defect(0.5, SCALAR, 1.0, 1.0) == pytest.approx(ref, rel=1e-12)
    assert ref == pytest.approx(0.153, abs=1e-3)
    assert semigroup_defect(0.6, np.zeros((4, 4)), 2.0, 3.0) == 0.0


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_semigroup_violated_for_fractional_order(alpha):
    assert semigroup_defect(alpha, SCALAR, 1.0, 1.0) >= 0.01


@settings(max_examples=100, deadline=None)
@given(fields, st.floats(0.05, 2.0), st.floats(0.05, 2.0))
def test_semigroup_law_at_alpha_one(cfg, tau, s):
    lam = lambda_matrix(cfg)
    eig = modal_decomposition(lam)
    whole = np.linalg.norm(propagator(1.0, lam, tau + s, eig).matrix)
    defect = semigroup_defect(1.0, lam, tau, s, eig)
    assert defect <= 1e-11 * max(whole, semigroup_scale(1.0, lam, tau, s, eig))


@settings(max_examples=200, deadline=None)
@given(fields, st.floats(0.5, 1.5), st.floats(0.0, 1.0))
def test_eigen_and_series_agree(cfg, alpha, frac):
    lam = lambda_matrix(cfg)
    eig = modal_decomposition(lam)
    if not eig.diagonalizable:
        return
    norm = np.linalg.norm(lam)
    if norm == 0.0:
        return
    tau = (10.0 * frac / norm) ** (1.0 / alpha)
    a = matrix_ml_eigen(MlOrder(alpha), eig, tau)
    b = matrix_ml_series(MlOrder(alpha), lam, tau)
    assert np.linalg.norm(a - b) <= 1e-9 * (1.0 + np.linalg.norm(a))


@settings(max_examples=50, deadline=None)
@given(fields, st.floats(0.5, 1.9), st.floats(0.0, 4.0))
def test_real_input_stays_real(cfg, alpha, tau):
    lam = lambda_matrix(cfg)
    eig = modal_decomposition(lam)
    v = np.array([1.0, -0.5, 2.0, 0.25])
    out = propagator(alpha, lam, tau, eig).matrix @ v
    assert np.max(np.abs(out.imag)) <= 1e-12 * np.linalg.norm(v)
    grid = matrix_ml_grid(MlOrder(alpha), eig, [0.0, tau], v)
    assert np.max(np.abs(grid.imag)) <= 1e-12 * np.linalg.norm(v)


def test_grid_is_exact_at_zero():
    eig = modal_decomposition(PURE_E)
    v = np.array([1.0, 2.0, 3.0, 4.0])
    out = matrix_ml_grid(MlOrder(0.7, 2.0), eig, [0.0, 1.0], v)
    np.testing.assert_array_equal(out[0], v)


@pytest.mark.parametrize("lam", [PURE_B, PURE_E], ids=["pure-B", "pure-E"])
def test_propagator_solves_the_fractional_equation(lam):
    alpha = 0.5
    taus = np.linspace(0.0, 2.0, 2000)
    eig = modal_decomposition(lam)
    phi = np.stack([matrix_ml_grid(MlOrder(alpha), eig, taus, col) for col in np.eye(4)], axis=2)
    deriv = caputo_l1_grid(alpha, SampledFunction(taus, phi.reshape(taus.size, 16)))
    rhs = np.einsum("ij,tjk->tik", lam, phi).reshape(taus.size, 16)
    # relative to the size of ΛΦ at each node; the first nodes carry the L1 start-up error
    keep = taus >= 0.1
    err = np.linalg.norm(deriv - rhs, axis=1)[keep] / np.linalg.norm(rhs, axis=1)[keep]
    assert np.max(err) <= 5e-3


def test_bad_time_rejected():
    with pytest.raises(ValueError):
        matrix_ml_series(MlOrder(0.5), PURE_B, -1.0)
    with pytest.raises(ValueError):
        propagator(0.5, PURE_B, math.inf)
