"""Rational wavelet filters ``M(z) = Q U(z^N) Delta(z) V``.

``U`` is a rational inner function assembled from Blaschke-Potapov factors,
``V`` is the scaled DFT matrix and ``Delta(z) = diag(1, z^-1, ..., z^-(N-1))``.
Choosing ``Q = (U(1) V)^*`` normalizes the filter to ``M(1) = I``.

The low-pass symbol is the first entry of the polyphase column
``Q U(z^N) (1, z^-1, ..., z^-(N-1))^T``. Taken literally this ``m`` has
``m(1) = sqrt(N)`` and ``R1 = 1`` (convention ``paper-polyphase``); divided
by ``sqrt(N)`` it has ``m(1) = 1`` and ``R1 = 1/N`` (convention ``unit-dc``).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg_kernel import adjoint, as_matrix, identity, range_basis
from .realization import (
    Realization,
    constant,
    evaluate,
    minimize,
    product_chain,
    substitute_power,
)

CONVENTIONS = ("unit-dc", "paper-polyphase")


class ContractiveWarning(UserWarning):
    """The inner factor is not unitary on the circle."""


def check_convention(convention: str) -> str:
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")
    return convention


def dft_matrix(N: int) -> np.ndarray:
    """``V[l, j] = eps^(-l j) / sqrt(N)`` with ``eps = exp(2 pi i / N)``."""
    if N < 1:
        raise ValueError("N must be positive")
    lj = np.outer(np.arange(N), np.arange(N))
    return np.exp(-2j * np.pi * lj / N) / np.sqrt(N)


def delta_eval(N: int, z: complex) -> np.ndarray:
    if z == 0:
        raise ValueError("Delta(z) is undefined at z = 0")
    return np.diag(np.asarray(z, dtype=complex) ** -np.arange(N))


def delay_column(N: int) -> Realization:
    """Realization of ``(1, z^-1, ..., z^-(N-1))^T`` as a shift register."""
    D = np.zeros((N, 1), dtype=complex)
    D[0, 0] = 1.0
    if N == 1:
        return constant(D)
    d = N - 1
    A = np.diag(np.ones(d - 1), -1).astype(complex) if d > 1 else np.zeros((1, 1), dtype=complex)
    B = np.zeros((d, 1), dtype=complex)
    B[0, 0] = 1.0
    C = np.zeros((N, d), dtype=complex)
    C[1:, :] = identity(d)
    return Realization(A, B, C, D)


def delta_realization(N: int) -> Realization:
    """Realization of ``Delta(z)`` with one delay line per channel.

    Channel ``j`` carries ``j`` states, so the state dimension is
    ``N (N - 1) / 2``, the McMillan degree of ``Delta``.
    """
    D = np.zeros((N, N), dtype=complex)
    D[0, 0] = 1.0
    d = N * (N - 1) // 2
    if d == 0:
        return constant(D)
    A = np.zeros((d, d), dtype=complex)
    B = np.zeros((d, N), dtype=complex)
    C = np.zeros((N, d), dtype=complex)
    start = 0
    for j in range(1, N):
        for i in range(j - 1):
            A[start + i + 1, start + i] = 1.0
        B[start, j] = 1.0
        C[j, start + j - 1] = 1.0
        start += j
    return Realization(A, B, C, D)


@dataclass(frozen=True)
class BlaschkeFactor:
    """Elementary factor ``I - P + beta(z) P`` with ``beta(1) = 1``."""

    a: complex
    P: np.ndarray

    def __post_init__(self):
        P = as_matrix(self.P, "P")
        if P.shape[0] != P.shape[1]:
            raise ValueError("projection must be square")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "a", complex(self.a))

    def projection_residual(self) -> float:
        P = self.P
        return float(max(np.linalg.norm(P @ P - P), np.linalg.norm(P - adjoint(P))))


@dataclass(frozen=True)
class RationalInner:
    """``U(z) = left_constant * prod_k (I - P_k + beta_k(z) P_k)``."""

    factors: tuple[BlaschkeFactor, ...]
    left_constant: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "left_constant", as_matrix(self.left_constant, "left_constant"))
        n = self.left_constant.shape[0]
        for f in self.factors:
            if f.P.shape != (n, n):
                raise ValueError(f"projection of shape {f.P.shape} does not match size {n}")

    @property
    def size(self) -> int:
        return self.left_constant.shape[0]


def blaschke_factor_realization(f: BlaschkeFactor, tol: float = 1e-10) -> Realization:
    """Realization of ``I - P + beta(z) P`` with ``rank(P)`` states.

    ``beta(z) = k (1 - conj(a) z) / (z - a)`` with ``k = (1 - a) / (1 - conj(a))``,
    so ``beta(1) = 1`` and ``|beta| = 1`` on the circle. Writing
    ``P = W W^*`` with orthonormal ``W`` gives
    ``(a I, k (1 - |a|^2) W^*, W, I - (1 + k conj(a)) P)``.
    """
    a = f.a
    if abs(a) >= 1:
        raise ValueError(f"pole a={a} is not inside the unit disk")
    if f.projection_residual() > 1e-8:
        raise ValueError("P is not an orthogonal projection")
    W = range_basis(f.P, tol)
    r = W.shape[1]
    n = f.P.shape[0]
    k = (1 - a) / (1 - np.conj(a))
    P = W @ adjoint(W)
    D = identity(n) - (1 + k * np.conj(a)) * P
    return Realization(a * identity(r), k * (1 - abs(a) ** 2) * adjoint(W), W, D)


def assemble_inner(inner: RationalInner, max_radius: float = 0.98) -> Realization:
    """Realization of ``U`` as the product of its elementary factors."""
    for f in inner.factors:
        if abs(f.a) >= 1:
            raise ValueError(f"pole a={f.a} is not inside the unit disk")
        if abs(f.a) >= max_radius:
            raise ValueError(f"pole a={f.a} exceeds the allowed radius {max_radius}")
    parts = [constant(inner.left_constant)]
    parts += [blaschke_factor_realization(f) for f in inner.factors]
    return product_chain(parts)


def random_projection(N: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.standard_normal((N, rank)) + 1j * rng.standard_normal((N, rank))
    W = range_basis(x)
    return W @ adjoint(W)


def random_unitary(N: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    return range_basis(x)


def random_rational_inner(N: int, nfactors: int, rng: np.random.Generator,
                          max_radius: float = 0.9) -> RationalInner:
    """Random inner function with ``nfactors`` Blaschke-Potapov factors."""
    factors = []
    for _ in range(nfactors):
        a = max_radius * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        rank = int(rng.integers(1, N + 1))
        factors.append(BlaschkeFactor(a, random_projection(N, rank, rng)))
    return RationalInner(tuple(factors), random_unitary(N, rng))


def circle_grid(points: int) -> np.ndarray:
    return np.exp(2j * np.pi * (np.arange(points) + 0.5) / points)


def unitarity_residual(func, size: int, points: int = 64) -> float:
    """``max ||F(z)^* F(z) - I||_F`` over a uniform circle grid."""
    eye = identity(size)
    return max(float(np.linalg.norm(adjoint(F) @ F - eye))
               for F in (func(z) for z in circle_grid(points)))


@dataclass(frozen=True, eq=False)
class WaveletFilter:
    N: int
    U: Realization
    Q: np.ndarray
    V: np.ndarray = field(repr=False)
    inner: RationalInner | None = field(default=None, repr=False)

    def __call__(self, z: complex) -> np.ndarray:
        """``M(z) = Q U(z^N) Delta(z) V``."""
        return self.Q @ evaluate(self.U, z ** self.N) @ delta_eval(self.N, z) @ self.V

    def polyphase_column(self, z: complex) -> np.ndarray:
        """``(m_0(z), ..., m_{N-1}(z)) = Q U(z^N) (1, z^-1, ..., z^-(N-1))``."""
        if z == 0:
            raise ValueError("polyphase column is undefined at z = 0")
        delays = np.asarray(z, dtype=complex) ** -np.arange(self.N)
        return self.Q @ evaluate(self.U, z ** self.N) @ delays

    def unitarity_residual(self, points: int = 64) -> float:
        return unitarity_residual(self, self.N, points)

    def normalization_residual(self) -> float:
        return float(np.linalg.norm(self(1.0) - identity(self.N)))


def build_filter(U, N: int | None = None, unitarity_tol: float = 1e-8) -> WaveletFilter:
    """Wavelet filter with ``Q = (U(1) V)^*`` so that ``M(1) = I``.

    ``U`` may be a :class:`RationalInner` or an ``N x N`` :class:`Realization`.
    A ``U`` that is not unitary on the circle is accepted with a
    :class:`ContractiveWarning`.
    """
    inner = None
    if isinstance(U, RationalInner):
        inner = U
        U = assemble_inner(U)
    n = U.shape[0]
    if U.shape != (n, n):
        raise ValueError(f"U must be square, got {U.shape}")
    if N is None:
        N = n
    if n != N:
        raise ValueError(f"U is {n}x{n} but N = {N}")
    V = dft_matrix(N)
    Q = adjoint(evaluate(U, 1.0) @ V)
    res = unitarity_residual(lambda z: evaluate(U, z), N)
    if res > unitarity_tol:
        warnings.warn(f"U is not unitary on the circle (residual {res:.3e}); "
                      "treating it as contractive", ContractiveWarning, stacklevel=2)
    return WaveletFilter(N, U, Q, V, inner)


def polyphase_realization(wf: WaveletFilter) -> Realization:
    """Realization of the column ``Q U(z^N) (1, z^-1, ..., z^-(N-1))^T``."""
    return product_chain([constant(wf.Q), substitute_power(wf.U, wf.N), delay_column(wf.N)])


def filter_realization(wf: WaveletFilter) -> Realization:
    """Realization of the whole matrix function ``M(z) = Q U(z^N) Delta(z) V``."""
    return product_chain([constant(wf.Q), substitute_power(wf.U, wf.N),
                          delta_realization(wf.N), constant(wf.V)])


def lowpass_symbol(wf: WaveletFilter, convention: str, tol: float = 1e-10) -> Realization:
    """Minimal realization of the low-pass symbol ``m``.

    ``paper-polyphase`` returns ``m_0`` itself (``m(1) = sqrt(N)``);
    ``unit-dc`` divides by ``sqrt(N)`` so that ``m(1) = 1``.
    """
    check_convention(convention)
    col = polyphase_realization(wf)
    m = Realization(col.A, col.B, col.C[:1], col.D[:1])
    if convention == "unit-dc":
        m = m.scaled(1 / np.sqrt(wf.N))
    return minimize(m, tol)


def fir_realization(taps: Sequence[complex]) -> Realization:
    """Scalar ``sum_n taps[n] z^-n`` as a shift register."""
    taps = np.asarray(taps, dtype=complex)
    if taps.size == 1:
        return constant(taps[0])
    d = taps.size - 1
    A = np.diag(np.ones(d - 1), -1).astype(complex) if d > 1 else np.zeros((1, 1), dtype=complex)
    B = np.zeros((d, 1), dtype=complex)
    B[0, 0] = 1.0
    return Realization(A, B, taps[1:].reshape(1, d), taps[:1].reshape(1, 1))


def preset_haar() -> Realization:
    """``m(z) = (1 + z^-1) / 2``."""
    return Realization([[0.0]], [[1.0]], [[0.5]], [[0.5]])


def preset_daubechies4() -> Realization:
    """Four-tap Daubechies symbol normalized to ``m(1) = 1``."""
    s3 = np.sqrt(3.0)
    return fir_realization(np.array([1 + s3, 3 + s3, 3 - s3, 1 - s3]) / 8)


def identity_inner(N: int) -> RationalInner:
    return RationalInner((), identity(N))
