import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ruelle_realize.linalg_kernel import (
    DimensionError,
    SingularMatrixError,
    as_matrix,
    block_upper_inverse,
    char_poly,
    inverse,
    operator_norm,
    range_basis,
    solve,
    spectral_radius,
)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_solve_matches_numpy(rng, n):
    a = random_complex(rng, (n, n))
    b = random_complex(rng, (n, 2))
    np.testing.assert_allclose(solve(a, b), np.linalg.solve(a, b), atol=1e-10)


def test_solve_singular_raises():
    with pytest.raises(SingularMatrixError):
        solve([[1.0, 2.0], [2.0, 4.0]], [[1.0], [0.0]])


def test_solve_zero_matrix_raises():
    with pytest.raises(SingularMatrixError):
        solve(np.zeros((2, 2)), np.ones((2, 1)))


def test_inverse_roundtrip(rng):
    a = random_complex(rng, (4, 4))
    np.testing.assert_allclose(inverse(a) @ a, np.eye(4), atol=1e-12)


def test_as_matrix_rejects_3d():
    with pytest.raises(DimensionError):
        as_matrix(np.zeros((2, 2, 2)))


@pytest.mark.parametrize("n", [1, 2, 4, 6])
def test_spectral_radius_against_eigvals(rng, n):
    for _ in range(10):
        a = random_complex(rng, (n, n))
        expected = max(abs(np.linalg.eigvals(a)))
        assert spectral_radius(a) == pytest.approx(expected, rel=1e-9)


def test_spectral_radius_nilpotent_and_jordan():
    assert spectral_radius([[0.0, 1.0], [0.0, 0.0]]) == pytest.approx(0.0, abs=1e-12)
    jordan = np.array([[0.5, 1.0], [0.0, 0.5]])
    assert spectral_radius(jordan) == pytest.approx(0.5, rel=1e-6)


def test_spectral_radius_full_output(rng):
    res = spectral_radius(random_complex(rng, (3, 3)), full_output=True)
    assert res.converged
    assert res.lower <= res.value * (1 + 1e-9)


def test_operator_norm_matches_svd(rng):
    a = random_complex(rng, (3, 5))
    assert operator_norm(a) == pytest.approx(np.linalg.norm(a, 2), rel=1e-10)


def test_range_basis_orthonormal(rng):
    x = random_complex(rng, (5, 2))
    a = np.concatenate([x, x @ random_complex(rng, (2, 3))], axis=1)
    W = range_basis(a)
    assert W.shape == (5, 2)
    np.testing.assert_allclose(W.conj().T @ W, np.eye(2), atol=1e-12)
    # projection onto range(W) leaves a unchanged
    np.testing.assert_allclose(W @ W.conj().T @ a, a, atol=1e-10)


def test_block_upper_inverse(rng):
    a, b, c = (random_complex(rng, (2, 2)) for _ in range(3))
    full = np.block([[a, -c], [np.zeros((2, 2)), b]])
    np.testing.assert_allclose(block_upper_inverse(a, b, c), np.linalg.inv(full), atol=1e-10)


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_char_poly_matches_numpy(n, seed):
    rng = np.random.default_rng(seed)
    a = random_complex(rng, (n, n))
    coeffs = char_poly(a)
    # numpy lists leading coefficient first
    np.testing.assert_allclose(coeffs[::-1], np.poly(a)[1:], atol=1e-8 * max(1, np.abs(np.poly(a)).max()))


def test_char_poly_cayley_hamilton(rng):
    a = random_complex(rng, (4, 4)) / 2
    coeffs = char_poly(a)
    acc = np.linalg.matrix_power(a, 4)
    for i, ci in enumerate(coeffs):
        acc = acc + ci * np.linalg.matrix_power(a, i)
    assert np.linalg.norm(acc) < 1e-10
