"""State-space realizations ``R(z) = D + C (zI - A)^{-1} B``.

A :class:`Realization` is an immutable quadruple of complex matrices. The
functions here build new realizations from old ones (similarity, products,
substitution ``z -> z^N``, Kalman reduction) and compute the observability
Gramian and the associated ``Y`` row used for autocorrelation formulas.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg_kernel import (
    DimensionError,
    SingularMatrixError,
    adjoint,
    as_matrix,
    identity,
    inverse,
    range_basis,
    solve,
    spectral_radius,
)

__all__ = [
    "Realization",
    "MultiVarRealization",
    "PoleError",
    "NotContractiveError",
    "constant",
    "evaluate",
    "evaluate_many",
    "similarity",
    "product",
    "product_chain",
    "multivar_product",
    "eval_multivar",
    "substitute_power",
    "from_alternative",
    "minimize",
    "controllability_matrix",
    "observability_gramian",
    "y_vector",
]


class PoleError(SingularMatrixError):
    """The evaluation point is (numerically) a pole."""


class NotContractiveError(ValueError):
    """The state matrix has spectral radius too close to or above one."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Realization:
    """Quadruple ``(A, B, C, D)`` with ``A`` d x d, ``B`` d x q, ``C`` p x d, ``D`` p x q.

    ``d = 0`` is allowed and represents the constant function ``D``.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        D = as_matrix(self.D, "D")
        p, q = D.shape
        A = np.asarray(self.A, dtype=complex)
        d = 0 if A.size == 0 else A.shape[0]
        A = A.reshape(d, d) if A.size == 0 else as_matrix(A, "A")
        B = np.asarray(self.B, dtype=complex)
        B = B.reshape(d, q) if B.size == 0 else as_matrix(B, "B")
        C = np.asarray(self.C, dtype=complex)
        C = C.reshape(p, d) if C.size == 0 else as_matrix(C, "C")
        if A.shape != (d, d):
            raise DimensionError(f"A must be square, got {A.shape}")
        if B.shape != (d, q):
            raise DimensionError(f"B has shape {B.shape}, expected {(d, q)}")
        if C.shape != (p, d):
            raise DimensionError(f"C has shape {C.shape}, expected {(p, d)}")
        for m in (A, B, C):
            if not np.all(np.isfinite(m)):
                raise ValueError("realization has non-finite entries")
        object.__setattr__(self, "A", _freeze(A))
        object.__setattr__(self, "B", _freeze(B))
        object.__setattr__(self, "C", _freeze(C))
        object.__setattr__(self, "D", _freeze(D))

    @property
    def state_dim(self) -> int:
        return self.A.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.D.shape

    def __call__(self, z: complex) -> np.ndarray:
        return evaluate(self, z)

    def scaled(self, factor: complex) -> "Realization":
        """Realization of ``factor * R(z)``."""
        return Realization(self.A, self.B, factor * self.C, factor * self.D)

    def __repr__(self):
        return f"Realization(d={self.state_dim}, shape={self.shape})"


def constant(value) -> Realization:
    """State-free realization of a constant matrix."""
    D = as_matrix(value, "value")
    p, q = D.shape
    return Realization(np.zeros((0, 0)), np.zeros((0, q)), np.zeros((p, 0)), D)


def evaluate(r: Realization, z: complex, tol: float | None = None) -> np.ndarray:
    """``D + C (zI - A)^{-1} B``; raises :class:`PoleError` at a pole."""
    d = r.state_dim
    if d == 0:
        return np.array(r.D)
    try:
        x = solve(z * identity(d) - r.A, r.B, tol)
    except SingularMatrixError as exc:
        raise PoleError(f"z={z} is a pole to working tolerance") from exc
    return r.D + r.C @ x


def evaluate_many(r: Realization, zs) -> np.ndarray:
    """Evaluate at each point of ``zs``; returns shape ``(len(zs), p, q)``."""
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    out = np.empty((zs.size,) + r.shape, dtype=complex)
    for i, z in enumerate(zs.ravel()):
        out[i] = evaluate(r, z)
    return out


def similarity(r: Realization, t) -> Realization:
    """``(T A T^-1, T B, C T^-1, D)``; the transfer function is unchanged."""
    t = as_matrix(t, "t")
    if t.shape != (r.state_dim, r.state_dim):
        raise DimensionError(f"similarity matrix has shape {t.shape}")
    try:
        ti = inverse(t)
    except SingularMatrixError as exc:
        raise SingularMatrixError("similarity matrix is singular") from exc
    return Realization(t @ r.A @ ti, t @ r.B, r.C @ ti, r.D)


def product(r1: Realization, r2: Realization) -> Realization:
    """Realization of ``R1(z) R2(z)``.

    The state matrix is ``[[A1, B1 C2], [0, A2]]`` with input
    ``[B1 D2; B2]``, output ``[C1, D1 C2]`` and feedthrough ``D1 D2``.
    """
    if r1.shape[1] != r2.shape[0]:
        raise DimensionError(f"cannot multiply {r1.shape}-valued by {r2.shape}-valued")
    m = multivar_product([r1, r2])
    return Realization(m.A, m.B, m.C, m.D)


def product_chain(rs: Sequence[Realization]) -> Realization:
    """Single-variable realization of ``R1(z) R2(z) ... Ru(z)``."""
    m = multivar_product(rs)
    return Realization(m.A, m.B, m.C, m.D)


@dataclass(frozen=True, eq=False)
class MultiVarRealization:
    """Realization of ``R1(z1) ... Ru(zu)`` with block-diagonal ``Lambda(z)``.

    ``blocks`` lists the state sizes ``(n1, ..., nu)``; ``A`` is block upper
    triangular with respect to that partition.
    """

    blocks: tuple[int, ...]
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    offsets: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        blocks = tuple(int(b) for b in self.blocks)
        n = sum(blocks)
        if self.A.shape != (n, n):
            raise DimensionError("A does not match the block partition")
        offs = tuple(int(x) for x in np.concatenate([[0], np.cumsum(blocks)]))
        for j in range(len(blocks)):
            lower = self.A[offs[j + 1]:, offs[j]:offs[j + 1]]
            if lower.size and np.any(lower != 0):
                raise ValueError("A is not block upper triangular")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "offsets", offs)
        for name in ("A", "B", "C", "D"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))

    def lam(self, zs) -> np.ndarray:
        """The diagonal matrix ``Lambda(z)`` with ``z_j I`` on block ``j``."""
        zs = list(zs)
        if len(zs) != len(self.blocks):
            raise DimensionError(f"expected {len(self.blocks)} variables, got {len(zs)}")
        return np.diag(np.repeat(np.asarray(zs, dtype=complex), self.blocks))


def multivar_product(rs: Sequence[Realization]) -> MultiVarRealization:
    """Realization of ``R1(z1) R2(z2) ... Ru(zu)``.

    Block ``(j, k)`` of the state matrix is ``Bj D(j+1) ... D(k-1) Ck`` for
    ``j < k`` and ``Aj`` on the diagonal. Input block ``j`` is
    ``Bj D(j+1) ... Du``, output block ``j`` is ``D1 ... D(j-1) Cj`` and the
    feedthrough is ``D1 ... Du``.
    """
    rs = list(rs)
    if not rs:
        raise ValueError("need at least one factor")
    for a, b in zip(rs, rs[1:]):
        if a.shape[1] != b.shape[0]:
            raise DimensionError(f"inner dimensions {a.shape} and {b.shape} do not chain")
    u = len(rs)
    blocks = [r.state_dim for r in rs]
    offs = np.concatenate([[0], np.cumsum(blocks)]).astype(int)
    n = int(offs[-1])
    p, q = rs[0].shape[0], rs[-1].shape[1]

    # left[j] = D1...Dj (p x cols), right[j] = D(j+1)...Du
    left = [identity(p)]
    for r in rs:
        left.append(left[-1] @ r.D)
    right = [None] * (u + 1)
    right[u] = identity(q)
    for j in range(u - 1, -1, -1):
        right[j] = rs[j].D @ right[j + 1]

    A = np.zeros((n, n), dtype=complex)
    B = np.zeros((n, q), dtype=complex)
    C = np.zeros((p, n), dtype=complex)
    for j, rj in enumerate(rs):
        sj = slice(offs[j], offs[j + 1])
        A[sj, sj] = rj.A
        B[sj] = rj.B @ right[j + 1]
        C[:, sj] = left[j] @ rj.C
        # running = Bj D(j+1) ... D(k-1)
        running = rj.B
        for k in range(j + 1, u):
            sk = slice(offs[k], offs[k + 1])
            A[sj, sk] = running @ rs[k].C
            running = running @ rs[k].D
    return MultiVarRealization(tuple(blocks), A, B, C, left[u])


def eval_multivar(m: MultiVarRealization, zs, tol: float | None = None) -> np.ndarray:
    """``D + C (Lambda(z) - A)^{-1} B`` for one value per factor."""
    lam = m.lam(zs)
    if lam.shape[0] == 0:
        return np.array(m.D)
    try:
        x = solve(lam - m.A, m.B, tol)
    except SingularMatrixError as exc:
        raise PoleError(f"Lambda(z) - A is singular at z={list(zs)}") from exc
    return m.D + m.C @ x


def substitute_power(r: Realization, n: int) -> Realization:
    """Realization of ``z -> R(z^n)`` with ``n * d`` states.

    The state matrix is the block cyclic shift carrying ``A`` in its
    bottom-left corner, so its ``n``-th power is ``A`` on the block diagonal.
    """
    if n < 1:
        raise ValueError("power must be positive")
    if n == 1 or r.state_dim == 0:
        return r
    d = r.state_dim
    p, q = r.shape
    A = np.zeros((n * d, n * d), dtype=complex)
    for i in range(n - 1):
        A[i * d:(i + 1) * d, (i + 1) * d:(i + 2) * d] = identity(d)
    A[(n - 1) * d:, :d] = r.A
    B = np.zeros((n * d, q), dtype=complex)
    B[(n - 1) * d:] = r.B
    C = np.zeros((p, n * d), dtype=complex)
    C[:, :d] = r.C
    return Realization(A, B, C, r.D)


def from_alternative(A, B, C, D) -> Realization:
    """Convert ``D + z C (I - z A)^{-1} B`` to the standard form.

    Requires ``A`` invertible; the result is
    ``(A^-1, A^-1 B, -C A^-1, D - C A^-1 B)``.
    """
    A = as_matrix(A, "A")
    try:
        Ai = inverse(A)
    except SingularMatrixError as exc:
        raise ValueError("alternative realization needs an invertible A") from exc
    B = as_matrix(B, "B")
    C = as_matrix(C, "C")
    return Realization(Ai, Ai @ B, -C @ Ai, as_matrix(D, "D") - C @ Ai @ B)


def controllability_matrix(A, B, k: int | None = None) -> np.ndarray:
    """``[B, AB, ..., A^(k-1) B]``; ``k`` defaults to the state dimension."""
    A = as_matrix(A, "A") if np.size(A) else np.zeros((0, 0), dtype=complex)
    B = np.asarray(B, dtype=complex).reshape(A.shape[0], -1)
    k = A.shape[0] if k is None else k
    cols = []
    x = B
    for _ in range(k):
        cols.append(x)
        x = A @ x
    if not cols:
        return np.zeros((A.shape[0], 0), dtype=complex)
    return np.concatenate(cols, axis=1)


def _reachable_basis(A: np.ndarray, B: np.ndarray, tol: float) -> np.ndarray:
    V = range_basis(B, tol)
    while True:
        W = range_basis(np.concatenate([V, A @ V], axis=1), tol)
        if W.shape[1] == V.shape[1]:
            return V
        V = W


def minimize(r: Realization, tol: float = 1e-10) -> Realization:
    """Two-stage Kalman reduction to a minimal realization.

    Unobservable states are removed first (reachable subspace of the dual
    pair ``(A^*, C^*)``), then unreachable ones. Subspaces are grown as Krylov
    spaces with a pivoted Gram-Schmidt whose relative rank threshold is
    ``tol``.
    """
    d = r.state_dim
    if d == 0:
        return r
    W = _reachable_basis(adjoint(r.A), adjoint(r.C), tol)
    A, B, C = adjoint(W) @ r.A @ W, adjoint(W) @ r.B, r.C @ W
    if A.shape[0]:
        V = _reachable_basis(A, B, tol)
        A, B, C = adjoint(V) @ A @ V, adjoint(V) @ B, C @ V
    if A.shape[0] == d:
        return r
    return Realization(A, B, C, r.D)


def _check_contractive(A: np.ndarray, margin: float) -> float:
    rho = spectral_radius(A) if A.size else 0.0
    if rho >= 1.0 - margin:
        raise NotContractiveError(
            f"Stein equation not contractive: spectral radius {rho:.6g} >= 1 - {margin:g}"
        )
    return rho


def observability_gramian(r: Realization, tol: float = 1e-15,
                          margin: float = 1e-9, max_doublings: int = 64) -> np.ndarray:
    """Solve ``G - A^* G A = C^* C`` by the doubling iteration.

    ``G`` accumulates ``sum_u (A^*)^u C^* C A^u`` in blocks of ``2^j`` terms:
    ``G <- G + (A_j)^* G A_j`` with ``A_{j+1} = A_j^2``.
    """
    A = r.A
    _check_contractive(A, margin)
    G = adjoint(r.C) @ r.C
    if A.shape[0] == 0:
        return G
    Aj = np.array(A)
    for _ in range(max_doublings):
        inc = adjoint(Aj) @ G @ Aj
        G = G + inc
        if np.linalg.norm(inc) <= tol * max(np.linalg.norm(G), 1.0):
            break
        Aj = Aj @ Aj
    return (G + adjoint(G)) / 2


def y_vector(r: Realization, gram=None) -> np.ndarray:
    """``Y = D^* C + B^* G A`` (q x d)."""
    d = r.state_dim
    if gram is None:
        G = observability_gramian(r)
    else:
        G = np.asarray(gram, dtype=complex).reshape(d, d) if np.size(gram) == d * d else as_matrix(gram, "gram")
    if G.shape != (d, d):
        raise DimensionError(f"Gramian has shape {G.shape}, expected {(d, d)}")
    return adjoint(r.D) @ r.C + adjoint(r.B) @ G @ r.A
