import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import fft_coefficients, random_contractive
from ruelle_realize.linalg_kernel import spectral_radius
from ruelle_realize.markov import (
    CoefficientSequence,
    autocorrelation_closed,
    autocorrelation_convolution,
    ch_recursion,
    decay_check,
    default_kcut,
    fit_decay_rate,
    markov_parameters,
    recursion_residual,
)
from ruelle_realize.realization import NotContractiveError, Realization, constant, controllability_matrix, y_vector


def test_sequence_zero_outside_window():
    c = CoefficientSequence(-1, [1.0, 2.0, 3.0])
    assert c[0][0, 0] == 2.0
    assert c[5][0, 0] == 0.0
    assert c.support() == (-1, 1)
    np.testing.assert_array_equal(c.indices, [-1, 0, 1])


def test_haar_markov(haar):
    h = markov_parameters(haar, 3).scalar()
    np.testing.assert_allclose(h, [0.5, 0.5, 0, 0], atol=0)


def test_nilpotent_markov_vanishes():
    A = np.diag([1.0, 1.0], -1)
    r = Realization(A, [[1], [0], [0]], [[1, 2, 3]], [[1]])
    h = markov_parameters(r, 8).scalar()
    assert np.all(h[4:] == 0)
    assert h[3] != 0


def test_constant_markov():
    h = markov_parameters(constant([[2.0]]), 3).scalar()
    np.testing.assert_array_equal(h, [2, 0, 0, 0])


def test_haar_autocorrelation(haar):
    c = autocorrelation_closed(haar, 3)
    np.testing.assert_allclose(c.scalar(), [0, 0, 0.25, 0.5, 0.25, 0, 0], atol=1e-15)


def test_haar_convolution_exact(haar):
    c = autocorrelation_convolution(haar, 3, kcut=4)
    np.testing.assert_allclose(c.scalar(), [0, 0, 0.25, 0.5, 0.25, 0, 0], atol=0)


def test_zero_function():
    r = Realization([[0.5]], [[1.0]], [[0.0]], [[0.0]])
    assert not np.any(autocorrelation_convolution(r, 4).scalar())
    assert not np.any(autocorrelation_closed(r, 4).scalar())


def test_constant_autocorrelation():
    c = autocorrelation_closed(constant([[1 + 1j]]), 2)
    np.testing.assert_allclose(c.scalar(), [0, 0, 2, 0, 0])


def test_d_zero_gamma_identity_form():
    # D = 0 and an isometric C-A pair give c_n = B^* A^n B
    A = np.diag([0.5, -0.3])
    C = np.sqrt(np.eye(2) - A.conj().T @ A)
    B = np.array([[1.0], [2.0]])
    r = Realization(A, B, C, np.zeros((2, 1)))
    c = autocorrelation_closed(r, 4)
    for n in range(1, 5):
        expected = B.conj().T @ np.linalg.matrix_power(A, n) @ B
        np.testing.assert_allclose(c[n], expected, atol=1e-12)


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_closed_equals_convolution(d, seed):
    r = random_contractive(np.random.default_rng(seed), d)
    a = autocorrelation_closed(r, 10)
    b = autocorrelation_convolution(r, 10)
    np.testing.assert_allclose(a.values, b.values, atol=1e-10)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_closed_equals_fft(rng, d):
    r = random_contractive(rng, d)
    c = autocorrelation_closed(r, 10)
    ref = fft_coefficients(r, 10)
    for n in range(-10, 11):
        assert abs(c[n][0, 0] - ref[n]) < 1e-8


def test_matrix_valued_convolution(rng):
    r = random_contractive(rng, 3, 2, 2)
    a = autocorrelation_closed(r, 6)
    b = autocorrelation_convolution(r, 6)
    np.testing.assert_allclose(a.values, b.values, atol=1e-10)


@pytest.mark.parametrize("p,q", [(1, 1), (2, 2), (3, 2)])
def test_hermitian_symmetry(rng, p, q):
    c = autocorrelation_closed(random_contractive(rng, 3, p, q), 8)
    for n in range(1, 9):
        np.testing.assert_allclose(c[-n], c[n].conj().T, atol=1e-14)


@pytest.mark.parametrize("K", [2, 5, 8])
def test_toeplitz_positive_semidefinite(rng, K):
    c = autocorrelation_closed(random_contractive(rng, 3), K)
    T = np.array([[c[j - k][0, 0] for k in range(K)] for j in range(K)])
    # shifting by a tiny multiple of the identity makes Cholesky succeed on PSD input
    np.linalg.cholesky(T + 1e-12 * np.eye(K))


def test_first_coefficients_from_controllability(rng):
    r = random_contractive(rng, 3)
    c = autocorrelation_closed(r, 3)
    row = y_vector(r) @ controllability_matrix(r.A, r.B)
    np.testing.assert_allclose(row[0], [c[n][0, 0] for n in (1, 2, 3)], atol=1e-12)


def test_not_contractive_raises():
    with pytest.raises(NotContractiveError):
        autocorrelation_closed(Realization([[1.5]], [[1]], [[1]], [[0]]), 3)


def test_haar_recursion(haar):
    a = ch_recursion(haar)
    np.testing.assert_allclose(a, [0.0], atol=1e-15)
    c = autocorrelation_closed(haar, 10)
    for p in range(1, 7):
        assert recursion_residual(a, c, p) < 1e-15


def test_diag_half_recursion():
    r = Realization([[0.5]], [[1.0]], [[1.0]], [[1.0]])
    a = ch_recursion(r)
    assert a[0] == pytest.approx(-0.5)
    c = autocorrelation_closed(r, 12)
    for p in range(1, 8):
        assert c[p + 1][0, 0] == pytest.approx(0.5 * c[p][0, 0], abs=1e-14)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_recursion_random(rng, d):
    r = random_contractive(rng, d)
    a = ch_recursion(r)
    c = autocorrelation_closed(r, d + 8)
    for p in range(1, 7):
        assert recursion_residual(a, c, p) < 1e-10


def test_recursion_needs_states():
    with pytest.raises(ValueError):
        ch_recursion(constant([[1.0]]))


def test_default_kcut_reaches_threshold(rng):
    r = random_contractive(rng, 3, rho=0.8)
    k = default_kcut(r)
    assert np.linalg.norm(np.linalg.matrix_power(r.A, k)) <= 1e-14


def test_decay_haar(haar):
    res = decay_check(autocorrelation_closed(haar, 10), 0.0)
    assert res.ok


def test_decay_geometric():
    r = Realization([[0.5]], [[1.0]], [[1.0]], [[1.0]])
    c = autocorrelation_closed(r, 30)
    res = decay_check(c, 0.5)
    assert res.ok
    ks = np.arange(1, 30)
    ratios = np.array([abs(c[k + 1][0, 0] / c[k][0, 0]) for k in ks])
    np.testing.assert_allclose(ratios, 0.5, rtol=1e-10)


def test_decay_flat_sequence_fails():
    c = CoefficientSequence(-40, np.ones(81))
    assert not decay_check(c, 0.5).ok


@pytest.mark.parametrize("rho", [0.2, 0.5, 0.8])
def test_fit_decay_rate_diagonal(rho):
    r = Realization([[rho]], [[1.0]], [[1.0]], [[0.0]])
    c = autocorrelation_closed(r, 12)
    assert fit_decay_rate(c) == pytest.approx(rho, rel=1e-8)


def test_fit_decay_rate_bounded_by_spectral_radius(rng):
    for _ in range(5):
        r = random_contractive(rng, 2)
        rate = fit_decay_rate(autocorrelation_closed(r, 12))
        assert rate <= spectral_radius(r.A) + 0.05
