"""Small dense complex linear algebra.

Every matrix in the package is a two-dimensional ``complex128`` numpy array.
State dimensions are small (tens at most), so the routines here favour
transparent algorithms over speed: Gaussian elimination with partial
pivoting for linear solves, repeated squaring for spectral radii and a
pivoted Gram-Schmidt for range bases.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

DEFAULT_TOL = 1e-12


class DimensionError(ValueError):
    """Operand shapes do not fit together."""


class SingularMatrixError(ValueError):
    """A pivot fell below the singularity threshold."""


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce ``x`` to a finite 2-D complex array.

    Scalars become 1x1 and 1-D input becomes a column.
    """
    a = np.asarray(x, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(-1, 1)
    elif a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex)


def mat_mul(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def adjoint(a) -> np.ndarray:
    return np.conj(as_matrix(a)).T


def _threshold(a: np.ndarray, tol: float | None) -> float:
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    return (DEFAULT_TOL if tol is None else tol) * scale


def solve(a, b, tol: float | None = None) -> np.ndarray:
    """Solve ``a @ x = b`` by Gaussian elimination with partial pivoting.

    Parameters
    ----------
    a : (n, n) array_like
    b : (n, k) array_like
    tol : float, optional
        Relative pivot threshold. A pivot whose magnitude is at most
        ``tol * max|a_ij|`` marks the matrix as singular. Defaults to 1e-12.

    Raises
    ------
    SingularMatrixError
        If a pivot falls below the threshold.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    n = a.shape[0]
    if a.shape[1] != n:
        raise DimensionError(f"solve needs a square matrix, got {a.shape}")
    if b.shape[0] != n:
        raise DimensionError(f"right-hand side has {b.shape[0]} rows, expected {n}")
    if n == 0:
        return np.zeros((0, b.shape[1]), dtype=complex)
    thr = _threshold(a, tol)
    m = np.concatenate([a, b], axis=1)
    for k in range(n):
        p = k + int(np.argmax(np.abs(m[k:, k])))
        piv = abs(m[p, k])
        if piv == 0.0 or piv <= thr:
            raise SingularMatrixError(
                f"pivot {piv:.3e} at column {k} is below threshold {thr:.3e}"
            )
        if p != k:
            m[[k, p]] = m[[p, k]]
        if k + 1 < n:
            factors = m[k + 1:, k] / m[k, k]
            m[k + 1:, k:] -= np.outer(factors, m[k, k:])
    x = np.zeros((n, b.shape[1]), dtype=complex)
    for k in range(n - 1, -1, -1):
        x[k] = (m[k, n:] - m[k, k + 1:n] @ x[k + 1:]) / m[k, k]
    return x


def inverse(a, tol: float | None = None) -> np.ndarray:
    a = as_matrix(a, "a")
    return solve(a, identity(a.shape[0]), tol)


class SpectralRadius(NamedTuple):
    value: float
    converged: bool
    lower: float


def spectral_radius(a, tol: float | None = None, *, seed: int = 0,
                    restarts: int = 3, max_squarings: int = 64,
                    full_output: bool = False):
    """Estimate the spectral radius of a square matrix without an eigensolve.

    The upper estimate is Gelfand's formula ``||a^k||_F^(1/k)`` evaluated
    along ``k = 2^j`` by repeated squaring, with the scale kept in log form
    so that neither overflow nor underflow occurs. The lower estimate comes
    from power iteration with the squared matrix on a few random starting
    vectors. The iteration stops once the two agree within ``tol`` (scaled
    by ``max|a_ij|``).

    This is an estimate, not an eigenvalue computation. The returned value is
    the Gelfand estimate, which never falls below the true radius except by
    rounding. With ``full_output=True`` a :class:`SpectralRadius` tuple is
    returned whose ``converged`` flag is False when the squaring cap was hit
    before the bounds met.
    """
    a = as_matrix(a, "a")
    n = a.shape[0]
    if a.shape[1] != n:
        raise DimensionError(f"spectral radius needs a square matrix, got {a.shape}")
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if scale == 0.0:
        res = SpectralRadius(0.0, True, 0.0)
        return res if full_output else res.value
    atol = (DEFAULT_TOL if tol is None else tol) * max(scale, 1.0)

    rng = np.random.default_rng(seed)
    xs = rng.standard_normal((n, restarts)) + 1j * rng.standard_normal((n, restarts))

    p = a / scale
    log_s = np.log(scale)  # a^(2^j) = exp(log_s) * p, ||p||_F = 1 after rescaling
    nrm = np.linalg.norm(p)
    p = p / nrm
    log_s += np.log(nrm)
    upper = lower = np.exp(log_s)
    converged = False
    for j in range(max_squarings):
        k = 2.0 ** j
        upper = float(np.exp(log_s / k))
        px = p @ xs
        ppx = p @ px
        n1 = np.linalg.norm(px, axis=0)
        n2 = np.linalg.norm(ppx, axis=0)
        ok = (n1 > 0) & (n2 > 0)
        if np.any(ok):
            lower = float(np.max(np.exp((log_s + np.log(n2[ok] / n1[ok])) / k)))
        else:
            lower = 0.0
        if abs(upper - lower) <= atol:
            converged = True
            break
        q = p @ p
        nq = np.linalg.norm(q)
        if nq == 0.0:
            upper, lower, converged = 0.0, 0.0, True
            break
        p = q / nq
        log_s = 2.0 * log_s + np.log(nq)
    res = SpectralRadius(upper, converged, min(lower, upper))
    return res if full_output else res.value


def operator_norm(a, tol: float | None = None) -> float:
    """Spectral norm ``||a||_2`` as the square root of ``rho(a^* a)``."""
    a = as_matrix(a, "a")
    if a.size == 0:
        return 0.0
    return float(np.sqrt(spectral_radius(adjoint(a) @ a, tol)))


def range_basis(a, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the column space of ``a``.

    Modified Gram-Schmidt with column pivoting and one re-orthogonalisation
    pass. Columns whose residual norm drops to ``tol`` times the largest
    initial column norm are treated as dependent. Returns an ``(n, r)`` array.
    """
    a = as_matrix(a, "a").copy()
    n, k = a.shape
    if n == 0 or k == 0:
        return np.zeros((n, 0), dtype=complex)
    norms = np.linalg.norm(a, axis=0)
    big = float(np.max(norms))
    if big == 0.0:
        return np.zeros((n, 0), dtype=complex)
    thr = tol * big
    basis = []
    active = np.ones(k, dtype=bool)
    for _ in range(min(n, k)):
        norms = np.where(active, np.linalg.norm(a, axis=0), -1.0)
        j = int(np.argmax(norms))
        if norms[j] <= thr:
            break
        q = a[:, j] / norms[j]
        for prev in basis:
            q = q - prev * np.vdot(prev, q)
        q = q / np.linalg.norm(q)
        basis.append(q)
        active[j] = False
        a -= np.outer(q, q.conj() @ a)
        a -= np.outer(q, q.conj() @ a)
    if not basis:
        return np.zeros((n, 0), dtype=complex)
    return np.stack(basis, axis=1)


def block_upper_inverse(a, b, c) -> np.ndarray:
    """Inverse of ``[[a, -c], [0, b]]`` from the inverses of ``a`` and ``b``.

    Returns ``[[a^-1, a^-1 c b^-1], [0, b^-1]]``.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    c = as_matrix(c, "c")
    if c.shape != (a.shape[0], b.shape[0]):
        raise DimensionError(f"c has shape {c.shape}, expected {(a.shape[0], b.shape[0])}")
    ai = inverse(a)
    bi = inverse(b)
    top = np.concatenate([ai, ai @ c @ bi], axis=1)
    bottom = np.concatenate([np.zeros((b.shape[0], a.shape[0]), dtype=complex), bi], axis=1)
    return np.concatenate([top, bottom], axis=0)


def char_poly(a) -> np.ndarray:
    """Characteristic polynomial coefficients by Faddeev-LeVerrier.

    Returns ``(a_0, ..., a_{d-1})`` with
    ``det(lambda I - a) = lambda^d + a_{d-1} lambda^{d-1} + ... + a_0``.
    """
    a = as_matrix(a, "a")
    d = a.shape[0]
    if a.shape[1] != d:
        raise DimensionError("characteristic polynomial needs a square matrix")
    coeffs = np.zeros(d + 1, dtype=complex)
    coeffs[d] = 1.0
    m = np.zeros_like(a)
    eye = identity(d)
    for k in range(1, d + 1):
        m = a @ m + coeffs[d - k + 1] * eye
        coeffs[d - k] = -np.trace(a @ m) / k
    return coeffs[:d]
