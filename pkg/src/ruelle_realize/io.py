"""JSON encoding of realizations and filters.

Complex numbers are written as ``[re, im]`` pairs. On input a bare real
number is accepted as well.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .realization import Realization
from .wavelet import BlaschkeFactor, RationalInner


class FormatError(ValueError):
    """Malformed input document."""


def _decode_scalar(x) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    raise FormatError(f"cannot read {x!r} as a complex number")


def decode_matrix(rows, name: str = "matrix", cols: int | None = None) -> np.ndarray:
    if not isinstance(rows, list):
        raise FormatError(f"{name} must be a list of rows")
    if not rows:
        return np.zeros((0, cols or 0), dtype=complex)
    if not all(isinstance(r, list) for r in rows):
        raise FormatError(f"{name} must be a list of rows")
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise FormatError(f"{name} has ragged rows")
    return np.array([[_decode_scalar(x) for x in r] for r in rows], dtype=complex).reshape(len(rows), width.pop())


def encode_matrix(a) -> list:
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    return [[[float(x.real), float(x.imag)] for x in row] for row in a]


def realization_from_dict(doc: dict) -> Realization:
    try:
        D = decode_matrix(doc["D"], "D")
        p, q = D.shape
        A = decode_matrix(doc["A"], "A")
        d = A.shape[0]
        B = decode_matrix(doc["B"], "B", cols=q)
        C = decode_matrix(doc["C"], "C")
    except KeyError as exc:
        raise FormatError(f"realization is missing field {exc}") from exc
    if d == 0:
        A = np.zeros((0, 0))
        B = np.zeros((0, q))
        C = np.zeros((p, 0))
    try:
        return Realization(A, B, C, D)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def realization_to_dict(r: Realization) -> dict:
    return {
        "A": encode_matrix(r.A) if r.state_dim else [],
        "B": encode_matrix(r.B) if r.state_dim else [],
        "C": [[] for _ in range(r.shape[0])] if not r.state_dim else encode_matrix(r.C),
        "D": encode_matrix(r.D),
    }


def filter_from_dict(doc: dict) -> tuple[int, RationalInner]:
    try:
        N = doc["N"]
        raw_factors = doc.get("factors", [])
        left = decode_matrix(doc["leftConstant"], "leftConstant")
    except KeyError as exc:
        raise FormatError(f"filter is missing field {exc}") from exc
    if not isinstance(N, int) or isinstance(N, bool) or N < 2:
        raise FormatError(f"N must be an integer >= 2, got {N!r}")
    if left.shape != (N, N):
        raise FormatError(f"leftConstant must be {N}x{N}, got {left.shape}")
    factors = []
    for i, f in enumerate(raw_factors):
        try:
            a = _decode_scalar(f["a"])
            P = decode_matrix(f["P"], f"factors[{i}].P")
        except KeyError as exc:
            raise FormatError(f"factor {i} is missing field {exc}") from exc
        if P.shape != (N, N):
            raise FormatError(f"factors[{i}].P must be {N}x{N}, got {P.shape}")
        factors.append(BlaschkeFactor(a, P))
    return N, RationalInner(tuple(factors), left)


def filter_to_dict(N: int, inner: RationalInner) -> dict:
    return {
        "N": N,
        "factors": [{"a": [f.a.real, f.a.imag], "P": encode_matrix(f.P)} for f in inner.factors],
        "leftConstant": encode_matrix(inner.left_constant),
    }


def load_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: top level must be an object")
    return doc
