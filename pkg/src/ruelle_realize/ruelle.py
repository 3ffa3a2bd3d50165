"""The Ruelle transfer operator of a low-pass symbol ``m``.

Two pictures are implemented side by side. Pointwise, the operator averages
``|m(w)|^2 f(w)`` over the ``N`` preimages of ``z`` under ``w -> w^N``. On
coefficient sequences it is the slanted matrix ``r[l, k] = c[N l - k] / N``
built from the autocorrelation coefficients of ``m``.

The two pictures differ by a factor ``N`` and by the direction of the
index: if ``f(z) = sum f_k z^k`` then the Fourier coefficients of the
pointwise image are ``sum_k c[k - N l] f_k``. This is ``N`` times the
slanted-matrix image built from ``c.reflected()``, the coefficients of
``z^n`` in ``|m(z)|^2``. For symbols with real coefficients ``c`` is
symmetric and only the factor ``N`` remains. Both normalizations are kept
exactly as defined.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .linalg_kernel import adjoint, identity, solve
from .markov import CoefficientSequence, autocorrelation_closed
from .realization import Realization, evaluate, observability_gramian, y_vector


class TruncationWarning(UserWarning):
    """Input mass lies outside the operator's column window."""


@dataclass(frozen=True, eq=False)
class WeightedSequence:
    """Scalar sequence ``f_n`` for ``n = offset .. offset+len-1`` with weight ``r``."""

    offset: int
    values: np.ndarray
    weight: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=complex).ravel()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "offset", int(self.offset))

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.values.size)

    def __getitem__(self, n: int) -> complex:
        i = int(n) - self.offset
        return complex(self.values[i]) if 0 <= i < self.values.size else 0j

    @classmethod
    def delta(cls, n: int = 0, weight: float = 0.0) -> "WeightedSequence":
        return cls(n, [1.0], weight)


def weighted_norm(f: WeightedSequence, r: float | None = None, p: int = 1) -> float:
    """``sum e^{r|n|} |f_n|`` for ``p = 1``; ``sqrt(sum e^{r|n|} |f_n|^2)`` for ``p = 2``."""
    r = f.weight if r is None else r
    w = np.exp(r * np.abs(f.indices))
    if p == 1:
        return float(np.sum(w * np.abs(f.values)))
    if p == 2:
        return float(np.sqrt(np.sum(w * np.abs(f.values) ** 2)))
    raise ValueError("p must be 1 or 2")


class Window(NamedTuple):
    l_min: int
    l_max: int
    k_min: int
    k_max: int


@dataclass(frozen=True, eq=False)
class SlantedOperator:
    """Sparse window of the slanted matrix ``r[l, k] = c[N l - k] / N``.

    ``rows``, ``cols`` and ``data`` hold the nonzero entries in row-major
    order.
    """

    N: int
    coefficients: CoefficientSequence
    window: Window
    rows: np.ndarray
    cols: np.ndarray
    data: np.ndarray

    def entry(self, l: int, k: int) -> complex:
        w = self.window
        if not (w.l_min <= l <= w.l_max and w.k_min <= k <= w.k_max):
            raise IndexError(f"({l}, {k}) outside window {tuple(w)}")
        return complex(self.coefficients[self.N * l - k][0, 0]) / self.N

    def __len__(self):
        return self.data.size

    def triplets(self):
        return list(zip(self.rows.tolist(), self.cols.tolist(), self.data.tolist()))

    def to_dense(self) -> np.ndarray:
        w = self.window
        out = np.zeros((w.l_max - w.l_min + 1, w.k_max - w.k_min + 1), dtype=complex)
        out[self.rows - w.l_min, self.cols - w.k_min] = self.data
        return out


def slanted_matrix(c: CoefficientSequence, N: int, window) -> SlantedOperator:
    """Materialize ``c[N l - k] / N`` over ``window = (l_min, l_max, k_min, k_max)``.

    Entries whose index ``N l - k`` falls outside the stored coefficients, or
    whose coefficient is exactly zero, are omitted.
    """
    if N < 2:
        raise ValueError("scaling N must be at least 2")
    if c.block_shape != (1, 1):
        raise ValueError("slanted matrix needs scalar coefficients")
    window = Window(*(int(x) for x in window))
    if window.l_min > window.l_max or window.k_min > window.k_max:
        raise ValueError(f"empty window {tuple(window)}")
    vals = c.scalar()
    rows, cols, data = [], [], []
    for l in range(window.l_min, window.l_max + 1):
        for k in range(window.k_min, window.k_max + 1):
            i = N * l - k - c.offset
            if 0 <= i < vals.size and vals[i] != 0:
                rows.append(l)
                cols.append(k)
                data.append(vals[i] / N)
    return SlantedOperator(
        N, c, window,
        np.asarray(rows, dtype=int), np.asarray(cols, dtype=int),
        np.asarray(data, dtype=complex),
    )


def default_window(rho: float, N: int, l_radius: int, eps: float = 1e-12) -> Window:
    """Rows ``|l| <= l_radius``; columns wide enough that ``(rho + 0.01)^width < eps``."""
    rate = min(rho + 0.01, 0.999)
    width = int(np.ceil(np.log(eps) / np.log(rate))) if rate > 0 else 1
    return Window(-l_radius, l_radius, -N * l_radius - width, N * l_radius + width)


def apply(op: SlantedOperator, f: WeightedSequence) -> WeightedSequence:
    """``(Rf)_l = (1/N) sum_k c[N l - k] f_k`` over the operator's row window.

    Mass of ``f`` outside the column window is dropped with a
    :class:`TruncationWarning`. Each row is summed in increasing ``k``.
    """
    w = op.window
    idx = f.indices
    inside = (idx >= w.k_min) & (idx <= w.k_max)
    if np.any(f.values[~inside] != 0):
        warnings.warn("input has support outside the column window; truncated",
                      TruncationWarning, stacklevel=2)
    fk = np.zeros(w.k_max - w.k_min + 1, dtype=complex)
    fk[idx[inside] - w.k_min] = f.values[inside]
    out = np.zeros(w.l_max - w.l_min + 1, dtype=complex)
    for l, k, v in zip(op.rows, op.cols, op.data):
        out[l - w.l_min] += v * fk[k - w.k_min]
    return WeightedSequence(w.l_min, out, f.weight)


def nth_roots(z: complex, N: int) -> np.ndarray:
    """The ``N`` solutions of ``w^N = z``, starting from the principal argument."""
    theta = np.angle(z)
    p = np.arange(N)
    return abs(z) ** (1.0 / N) * np.exp(1j * (theta + 2 * np.pi * p) / N)


def _abs2(value: np.ndarray) -> float:
    return float(np.sum(np.abs(value) ** 2))


def apply_pointwise(m: Realization, N: int, f: Callable[[complex], complex],
                    z: complex, atol: float = 1e-12) -> complex:
    """``(Rf)(z) = (1/N) sum_{w^N = z} |m(w)|^2 f(w)`` for ``|z| = 1``.

    For matrix-valued ``m`` the squared Frobenius norm is used.
    """
    if abs(abs(z) - 1.0) > atol:
        raise ValueError(f"|z| = {abs(z)} is not on the unit circle")
    total = 0j
    for w in nth_roots(z, N):
        total += _abs2(evaluate(m, w)) * f(w)
    return total / N


def r1(m: Realization, N: int, z: complex) -> float:
    """``(R1)(z)``, the Ruelle operator applied to the constant function 1."""
    return float(np.real(apply_pointwise(m, N, lambda w: 1.0, z)))


def r1_deviation(m: Realization, N: int, target: float, points: int = 32) -> float:
    """``max |R1(z) - target|`` over ``points`` equally spaced circle points."""
    zs = np.exp(2j * np.pi * np.arange(points) / points)
    return max(abs(r1(m, N, z) - target) for z in zs)


def trace_spectral(m: Realization, N: int) -> float:
    """``(1/N) sum_{w^N = 1} |m(w)|^2``."""
    return sum(_abs2(evaluate(m, w)) for w in nth_roots(1.0, N)) / N


def trace_realization(r: Realization, N: int) -> float:
    """``(1/N) (D D^* + B^* G B + Y (I-A)^{-1} B + B^* (I-A^*)^{-1} Y^*)``.

    Scalar ``m`` only. The bracket is ``sum_n c_n = |m(1)|^2``.
    """
    if r.shape != (1, 1):
        raise ValueError("trace formula is implemented for scalar m only")
    d = r.state_dim
    val = r.D @ adjoint(r.D)
    if d:
        G = observability_gramian(r)
        Y = y_vector(r, G)
        val = (val + adjoint(r.B) @ G @ r.B
               + Y @ solve(identity(d) - r.A, r.B)
               + adjoint(r.B) @ solve(identity(d) - adjoint(r.A), adjoint(Y)))
    return float(np.real(val[0, 0])) / N


def trace_coefficients(c: CoefficientSequence, N: int) -> float:
    """Diagonal sum of the slanted matrix, ``(1/N) sum_k c[(N-1) k]``."""
    vals = c.scalar()
    idx = c.indices
    sel = idx % (N - 1) == 0
    return float(np.real(np.sum(vals[sel]))) / N


def aliased_coefficients(c: CoefficientSequence, N: int) -> float:
    """``sum_k c[N k]``, which equals :func:`trace_spectral` by aliasing."""
    vals = c.scalar()
    sel = c.indices % N == 0
    return float(np.real(np.sum(vals[sel])))


class ContinuityReport(NamedTuple):
    max_ratio: float
    bound: float
    constant: float
    ok: bool
    trials: int


def continuity_certificate(c: CoefficientSequence, alpha: float, beta: float,
                           betaprime: float, N: int, trials: int = 100,
                           window: Sequence[int] | None = None,
                           rng: np.random.Generator | None = None) -> ContinuityReport:
    """Sample ``||Rf||_{beta',1} / ||f||_{beta,1}`` against the proof's constant.

    With ``|c_n| <= K e^{-alpha |n|}`` and ``|f_k| <= ||f||_{beta,1}
    e^{-beta |k|}``, the row bound ``N |(Rf)_l| <= K e^{-alpha N |l|}
    sum_k e^{(alpha - beta)|k|}`` gives

        ||Rf||_{beta',1} <= (K / N) S(beta - alpha) S(N alpha - beta') ||f||_{beta,1}

    where ``S(x) = sum_n e^{-x|n|} = (1 + e^{-x}) / (1 - e^{-x})``. ``K`` is
    the smallest constant valid over the stored coefficients.
    """
    if not alpha < beta:
        raise ValueError(f"need alpha < beta, got alpha={alpha}, beta={beta}")
    if not betaprime < N * alpha:
        raise ValueError(f"need beta' < N alpha, got beta'={betaprime}, N alpha={N * alpha}")
    rng = np.random.default_rng(0) if rng is None else rng
    vals = np.abs(c.scalar())
    K = float(np.max(vals * np.exp(alpha * np.abs(c.indices)))) if vals.size else 0.0

    def s(x):
        e = np.exp(-x)
        return (1 + e) / (1 - e)

    bound = K / N * s(beta - alpha) * s(N * alpha - betaprime)
    if window is None:
        lo, hi = c.offset, c.stop - 1
        kr = max(abs(lo), abs(hi)) + 8
        window = (-(kr // N) - 1, kr // N + 1, -kr, kr)
    op = slanted_matrix(c, N, window)
    w = op.window
    ks = np.arange(w.k_min, w.k_max + 1)
    worst = 0.0
    for _ in range(trials):
        raw = (rng.standard_normal(ks.size) + 1j * rng.standard_normal(ks.size)) * np.exp(-beta * np.abs(ks))
        f = WeightedSequence(w.k_min, raw, beta)
        f = WeightedSequence(w.k_min, raw / weighted_norm(f, beta, 1), beta)
        ratio = weighted_norm(apply(op, f), betaprime, 1)
        worst = max(worst, ratio)
    return ContinuityReport(worst, float(bound), K, worst <= bound * (1 + 1e-12), trials)


def coefficients_for_window(m: Realization, N: int, window) -> CoefficientSequence:
    """Closed-form coefficients covering every ``N l - k`` in ``window``."""
    w = Window(*window)
    nmax = max(abs(N * w.l_min - w.k_max), abs(N * w.l_max - w.k_min),
               abs(N * w.l_min - w.k_min), abs(N * w.l_max - w.k_max))
    return autocorrelation_closed(m, nmax)
