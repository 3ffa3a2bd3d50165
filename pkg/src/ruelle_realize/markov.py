"""Markov parameters and autocorrelation coefficients of ``M(z)^* M(z)``.

For a realization with contractive state matrix the Laurent coefficients
``h_k`` of ``M`` at infinity and the autocorrelation coefficients
``c_n = sum_j h_j^* h_(j+n)`` have closed forms in terms of the
observability Gramian. Since ``M(z) = sum_j h_j z^-j``, ``c_n`` multiplies
``z^-n`` in ``M(z)^* M(z)`` on the unit circle; the coefficient of ``z^n``
is ``c_(-n)`` (see :meth:`CoefficientSequence.reflected`). Both a closed-form and a truncated-convolution route
are provided so that one can check the other.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .linalg_kernel import adjoint, char_poly, identity
from .realization import Realization, _check_contractive, observability_gramian, y_vector


@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    """Two-sided matrix sequence stored on the window ``offset .. offset+len-1``.

    ``values`` has shape ``(len, p, q)``. Indices outside the window read as
    zero matrices.
    """

    offset: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim == 1:
            v = v.reshape(-1, 1, 1)
        if v.ndim != 3:
            raise ValueError(f"values must be (n, p, q), got shape {v.shape}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "offset", int(self.offset))

    def __len__(self):
        return self.values.shape[0]

    @property
    def stop(self) -> int:
        """One past the last stored index."""
        return self.offset + len(self)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.offset, self.stop)

    @property
    def block_shape(self) -> tuple[int, int]:
        return self.values.shape[1:]

    def __getitem__(self, n: int) -> np.ndarray:
        i = int(n) - self.offset
        if 0 <= i < len(self):
            return self.values[i]
        return np.zeros(self.block_shape, dtype=complex)

    def scalar(self) -> np.ndarray:
        """The values as a 1-D array; only for 1x1 blocks."""
        if self.block_shape != (1, 1):
            raise ValueError(f"sequence is {self.block_shape}-valued, not scalar")
        return self.values[:, 0, 0]

    def reflected(self) -> "CoefficientSequence":
        """The sequence ``n -> self[-n]``."""
        return CoefficientSequence(1 - self.stop, self.values[::-1])

    def support(self, atol: float = 0.0) -> tuple[int, int] | None:
        """Smallest and largest index with a block norm above ``atol``."""
        norms = np.linalg.norm(self.values.reshape(len(self), -1), axis=1)
        nz = np.nonzero(norms > atol)[0]
        if nz.size == 0:
            return None
        return self.offset + int(nz[0]), self.offset + int(nz[-1])


def markov_parameters(r: Realization, kmax: int) -> CoefficientSequence:
    """``h_0 = D`` and ``h_k = C A^(k-1) B`` for ``1 <= k <= kmax``."""
    if kmax < 0:
        raise ValueError("kmax must be non-negative")
    p, q = r.shape
    out = np.zeros((kmax + 1, p, q), dtype=complex)
    out[0] = r.D
    x = np.array(r.B)
    for k in range(1, kmax + 1):
        out[k] = r.C @ x
        x = r.A @ x
    return CoefficientSequence(0, out)


def autocorrelation_closed(r: Realization, nmax: int, gram=None) -> CoefficientSequence:
    """Closed-form ``c_n`` for ``|n| <= nmax``.

    ``c_0 = D^* D + B^* G B``, ``c_n = Y A^(n-1) B`` for ``n > 0`` and
    ``c_n = B^* (A^*)^(-n-1) Y^*`` for ``n < 0``, where ``G`` is the
    observability Gramian and ``Y = D^* C + B^* G A``.
    """
    if nmax < 0:
        raise ValueError("nmax must be non-negative")
    G = observability_gramian(r) if gram is None else np.asarray(gram, dtype=complex)
    Y = y_vector(r, G)
    q = r.shape[1]
    out = np.zeros((2 * nmax + 1, q, q), dtype=complex)
    out[nmax] = adjoint(r.D) @ r.D + adjoint(r.B) @ G @ r.B
    x = np.array(r.B)
    for n in range(1, nmax + 1):
        cn = Y @ x
        out[nmax + n] = cn
        out[nmax - n] = adjoint(cn)
        x = r.A @ x
    return CoefficientSequence(-nmax, out)


def default_kcut(r: Realization, threshold: float = 1e-14) -> int:
    """Smallest ``k`` with ``||A^k||_F <= threshold``.

    The search is capped at the larger of ``10 d / (1 - rho)`` and four
    times the geometric estimate ``log(threshold) / log(rho)``.
    """
    d = r.state_dim
    if d == 0:
        return 0
    rho = _check_contractive(r.A, 1e-9)
    cap = 10 * d / (1.0 - rho)
    if rho > 0:
        cap = max(cap, 4 * np.log(threshold) / np.log(rho) + d)
    cap = max(int(np.ceil(cap)), 1)
    x = identity(d)
    for k in range(1, cap + 1):
        x = x @ r.A
        if np.linalg.norm(x) <= threshold:
            return k
    return cap


def autocorrelation_convolution(r: Realization, nmax: int,
                                kcut: int | None = None) -> CoefficientSequence:
    """``c_n`` as the truncated sum ``sum_{j=0}^{kcut} h_j^* h_{j+n}``.

    Independent of the Gramian; used as an oracle for
    :func:`autocorrelation_closed`.
    """
    if kcut is None:
        kcut = default_kcut(r)
    h = markov_parameters(r, kcut + nmax).values
    q = r.shape[1]
    out = np.zeros((2 * nmax + 1, q, q), dtype=complex)
    hs = np.conj(np.swapaxes(h, 1, 2))
    for n in range(-nmax, nmax + 1):
        j0 = max(0, -n)
        acc = np.zeros((q, q), dtype=complex)
        for j in range(j0, kcut + 1):
            acc += hs[j] @ h[j + n]
        out[n + nmax] = acc
    return CoefficientSequence(-nmax, out)


def ch_recursion(r: Realization) -> np.ndarray:
    """Coefficients ``(a_0, ..., a_{d-1})`` of the monic characteristic polynomial of ``A``.

    By Cayley-Hamilton, ``a_0 c_p + ... + a_{d-1} c_{d+p-1} + c_{d+p} = 0``
    for every ``p >= 1``.
    """
    if r.state_dim < 1:
        raise ValueError("recursion needs at least one state")
    return char_poly(r.A)


def recursion_residual(coeffs, c: CoefficientSequence, p: int) -> float:
    """Norm of ``sum_i a_i c_{p+i} + c_{d+p}``."""
    d = len(coeffs)
    acc = np.array(c[d + p])
    for i, a in enumerate(coeffs):
        acc = acc + a * c[p + i]
    return float(np.linalg.norm(acc))


class DecayCheck(NamedTuple):
    constant: float
    ok: bool
    rate: float


def decay_check(c: CoefficientSequence, rho: float, slack: float = 0.01,
                limit: float = 1e6) -> DecayCheck:
    """Smallest ``K`` with ``|c_k| <= K (rho + slack)^|k|`` over the stored window."""
    rate = rho + slack
    idx = c.indices
    norms = np.linalg.norm(c.values.reshape(len(c), -1), axis=1)
    with np.errstate(divide="ignore", over="ignore"):
        logs = np.where(norms > 0, np.log(np.where(norms > 0, norms, 1.0)), -np.inf)
        logk = logs - np.abs(idx) * np.log(rate)
    K = float(np.exp(np.max(logk))) if np.any(norms > 0) else 0.0
    return DecayCheck(K, bool(np.isfinite(K) and K < limit), rate)


def fit_decay_rate(c: CoefficientSequence, kmin: int = 2, kmax: int = 12) -> float:
    """Least-squares geometric rate of ``|c_k|`` over ``kmin <= k <= kmax``.

    Fits ``log |c_k| = a + k log(rate)``; returns 0 if every coefficient in
    the range vanishes.
    """
    ks = np.arange(kmin, kmax + 1)
    norms = np.array([np.linalg.norm(c[k]) for k in ks])
    keep = norms > 0
    if keep.sum() < 2:
        return 0.0
    slope = np.polyfit(ks[keep], np.log(norms[keep]), 1)[0]
    return float(np.exp(slope))
