"""Infinite products of a rational matrix function and the wavelet cascade.

Infinite objects are handled as finite sections with explicit tail bounds.
The product ``M(z_1) M(z_2) ... M(z_n)`` has the realization obtained by
chaining ``n`` copies of ``(A, B, C, D)``; its state matrix is the leading
``n``-block section of the block-Toeplitz operator with symbol
``A + z B (I - z D)^{-1} C``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .linalg_kernel import identity, operator_norm, solve, spectral_radius
from .realization import PoleError, Realization, evaluate
from .ruelle import r1 as _r1


class NotNormalizedError(ValueError):
    """``M(1)`` differs from the identity."""


def _check_bounded(D: np.ndarray, margin: float = 1e-9) -> float:
    rho = spectral_radius(D) if D.size else 0.0
    if rho >= 1.0 - margin:
        raise ValueError(f"spectral radius of D is {rho:.6g}; the Toeplitz operator is unbounded")
    return rho


def toeplitz_symbol_eval(r: Realization, z: complex) -> np.ndarray:
    """``phi(z) = A + z B (I - z D)^{-1} C``."""
    D = r.D
    if D.shape[0] != D.shape[1]:
        raise ValueError("symbol needs a square M")
    return r.A + z * r.B @ solve(identity(D.shape[0]) - z * D, r.C)


def toeplitz_norm_estimate(r: Realization, grid: int = 256) -> float:
    """``max ||phi(z)||_2`` over ``grid`` equally spaced points of the circle."""
    _check_bounded(r.D)
    zs = np.exp(2j * np.pi * np.arange(grid) / grid)
    return max(operator_norm(toeplitz_symbol_eval(r, z)) for z in zs)


@dataclass(frozen=True, eq=False)
class ToeplitzSection:
    """First ``n`` block rows and columns of the product operators.

    ``mat_a`` has ``A`` on the block diagonal and ``B D^(j-i-1) C`` in block
    ``(i, j)`` for ``j > i``. ``vec_b`` is stored top-down with block ``i``
    equal to ``B D^(n-1-i)``, which is the bottom-up listing
    ``..., B D^2, B D, B`` read in reverse; ``vec_c`` is
    ``[C, D C, ..., D^(n-1) C]``. ``d_power`` is ``D^n``.
    """

    source: Realization
    n: int
    mat_a: np.ndarray
    vec_b: np.ndarray
    vec_c: np.ndarray
    d_power: np.ndarray

    def lam(self, zs) -> np.ndarray:
        zs = np.asarray(list(zs), dtype=complex)
        if zs.size != self.n:
            raise ValueError(f"need {self.n} points, got {zs.size}")
        return np.diag(np.repeat(zs, self.source.state_dim))

    def evaluate(self, zs) -> np.ndarray:
        """``D^n + vec_c (Lambda(z) - mat_a)^{-1} vec_b``, equal to ``M(z_1) ... M(z_n)``."""
        if self.mat_a.shape[0] == 0:
            return np.array(self.d_power)
        return self.d_power + self.vec_c @ solve(self.lam(zs) - self.mat_a, self.vec_b)


def toeplitz_section(r: Realization, n: int, check_bounded: bool = True) -> ToeplitzSection:
    """Finite section of the product operators.

    With ``check_bounded`` the call refuses ``rho(D) >= 1``, where the infinite
    operator is unbounded; the finite identity in
    :meth:`ToeplitzSection.evaluate` holds either way.
    """
    if n < 1:
        raise ValueError("section size must be positive")
    m = r.D.shape[0]
    if r.D.shape != (m, m):
        raise ValueError("sections need a square M")
    if check_bounded:
        _check_bounded(r.D)
    d = r.state_dim
    dpow = [identity(m)]
    for _ in range(n):
        dpow.append(dpow[-1] @ r.D)
    A = np.zeros((n * d, n * d), dtype=complex)
    B = np.zeros((n * d, m), dtype=complex)
    C = np.zeros((m, n * d), dtype=complex)
    for i in range(n):
        si = slice(i * d, (i + 1) * d)
        A[si, si] = r.A
        for j in range(i + 1, n):
            A[si, j * d:(j + 1) * d] = r.B @ dpow[j - i - 1] @ r.C
        B[si] = r.B @ dpow[n - 1 - i]
        C[:, si] = dpow[i] @ r.C
    return ToeplitzSection(r, n, A, B, C, dpow[n])


def _k_function(r: Realization, z: complex) -> float:
    """``||C (zI - A)^{-1} (I - A)^{-1} B||_2``."""
    d = r.state_dim
    if d == 0:
        return 0.0
    x = solve(identity(d) - r.A, r.B)
    x = solve(z * identity(d) - r.A, x)
    return operator_norm(r.C @ x)


def check_normalized(r: Realization, tol: float = 1e-10) -> None:
    try:
        m1 = evaluate(r, 1.0)
    except PoleError as exc:
        raise NotNormalizedError("M has a pole at z = 1") from exc
    if m1.shape[0] != m1.shape[1] or np.linalg.norm(m1 - identity(m1.shape[0])) > tol:
        raise NotNormalizedError(f"M(1) differs from I by {np.linalg.norm(m1 - identity(m1.shape[0])):.3e}")


class ProductResult(NamedTuple):
    value: np.ndarray
    bound: float
    cut: int
    K: float


def product_along_points(r: Realization, zs: Sequence[complex], tol: float = 1e-10,
                         grid: int = 64) -> ProductResult:
    """``M(z_1) M(z_2) ...`` over the supplied points, multiplied left to right.

    ``K`` bounds ``||C (zI - A)^{-1} (I - A)^{-1} B||`` on the closed disk about
    1 that contains every point (estimated on its boundary circle and at the
    points themselves), so ``||M(z_k) - I|| <= K |1 - z_k|``. ``cut`` is the
    first index whose tail satisfies ``K sum_{k >= cut} |1 - z_k| <= tol``
    and ``bound`` is that tail sum.
    """
    check_normalized(r)
    zs = np.asarray(list(zs), dtype=complex)
    m = r.D.shape[0]
    value = identity(m)
    for z in zs:
        value = value @ evaluate(r, z)
    dist = np.abs(1 - zs)
    K = 0.0
    if r.state_dim and zs.size:
        K = max(_k_function(r, z) for z in zs)
        radius = float(dist.max())
        while radius > 0:
            try:
                ring = 1 + radius * np.exp(2j * np.pi * np.arange(grid) / grid)
                K = max(K, max(_k_function(r, z) for z in ring))
                break
            except PoleError:
                radius /= 2
    tails = np.concatenate([np.cumsum(dist[::-1])[::-1], [0.0]])
    cut = int(np.argmax(K * tails <= tol))
    return ProductResult(value, float(K * tails[cut]), cut, float(K))


def cascade_constant(m: Realization, grid: int = 256) -> float:
    """``K_1 = max_theta |C (e^{i theta} I - A)^{-1} (I - A)^{-1} B|`` on a grid."""
    zs = np.exp(2j * np.pi * np.arange(grid) / grid)
    return max(_k_function(m, z) for z in zs)


def cascade_depth(K1: float, N: int, w: float, tol: float) -> int:
    """Smallest ``K`` with ``exp(K1 * 2 pi |w| / (N^K (N - 1))) - 1 <= tol``."""
    if w == 0 or K1 == 0:
        return 1
    depth = 1
    while np.expm1(K1 * 2 * np.pi * abs(w) / (N ** depth * (N - 1))) > tol:
        depth += 1
    return depth


def _check_unit_dc(m: Realization, tol: float = 1e-10) -> None:
    if m.shape != (1, 1):
        raise ValueError("cascade needs a scalar symbol")
    try:
        check_normalized(m, tol)
    except NotNormalizedError as exc:
        raise NotNormalizedError(f"cascade needs m(1) = 1 (unit-dc convention): {exc}") from exc


def father_hat(m: Realization, N: int, w: float, tol: float = 1e-12,
               K1: float | None = None) -> complex:
    """``prod_{k >= 1} m(exp(2 pi i w / N^k))`` truncated with a certified tail.

    The tail after ``K`` factors differs from 1 by at most
    ``exp(K1 sum_{k > K} 2 pi |w| / N^k) - 1``.
    """
    _check_unit_dc(m)
    if K1 is None:
        K1 = cascade_constant(m)
    depth = cascade_depth(K1, N, w, tol)
    val = 1.0 + 0j
    for k in range(1, depth + 1):
        val *= evaluate(m, np.exp(2j * np.pi * w / N ** k))[0, 0]
    return complex(val)


def _abs2_on_circle(m: Realization, zs: np.ndarray) -> np.ndarray:
    return np.array([abs(evaluate(m, z)[0, 0]) ** 2 for z in zs])


def partial_product_l2(m: Realization, N: int, k: int, quad_points: int = 64) -> float:
    """``int |f_k(w)|^2 dw`` over ``[-N^k/2, N^k/2]`` by composite Simpson.

    ``f_k(w) = prod_{l=0}^{k} m(exp(2 pi i w / N^l))``. ``quad_points`` is the
    number of subintervals per unit length (rounded up to even).
    """
    if m.shape != (1, 1):
        raise ValueError("needs a scalar symbol")
    half = N ** k / 2
    n = int(np.ceil(quad_points * 2 * half))
    n += n % 2
    w = np.linspace(-half, half, n + 1)
    integrand = np.ones_like(w)
    # factor l has period N^l, so evaluate once per distinct circle point
    for l in range(k + 1):
        period = N ** l
        phase = np.mod(w, period) / period
        uniq, inv = np.unique(np.round(phase, 14), return_inverse=True)
        integrand *= _abs2_on_circle(m, np.exp(2j * np.pi * uniq))[inv]
    h = 2 * half / n
    weights = np.ones(n + 1)
    weights[1:-1:2] = 4
    weights[2:-1:2] = 2
    return float(h / 3 * np.dot(weights, integrand))


@dataclass(frozen=True)
class L2Certificate:
    integrals: tuple[float, ...]
    certificate: float
    r1_max: float
    bounded: bool


class R1ExceedsOne(ValueError):
    """``R1 > 1`` somewhere on the circle."""


def l2_norm_estimate(m: Realization, N: int, kmax: int = 4, quad_points: int = 64,
                     r1_points: int = 64, growth_tol: float = 1e-6) -> L2Certificate:
    """Integrals ``int |f_k|^2`` for ``k = 0..kmax`` and their minimum.

    By Fatou's lemma the limit of ``f_k`` has squared L2 norm at most
    ``liminf int |f_k|^2``; the minimum over the computed ``k`` is reported
    as the certificate. ``bounded`` is False when the integrals grow with
    ``k`` (relative increase above ``growth_tol``), which flags a limit that
    is not square integrable.
    """
    zs = np.exp(2j * np.pi * np.arange(r1_points) / r1_points)
    r1_max = max(_r1(m, N, z) for z in zs)
    if r1_max > 1 + 1e-9:
        raise R1ExceedsOne(f"R1 reaches {r1_max:.12g} > 1")
    vals = tuple(partial_product_l2(m, N, k, quad_points) for k in range(kmax + 1))
    bounded = all(b <= a * (1 + growth_tol) + growth_tol for a, b in zip(vals, vals[1:]))
    return L2Certificate(vals, min(vals), r1_max, bounded)
