"""Command-line front end.

Every command reads a realization or filter (``--input`` JSON or a built-in
``--preset``), runs one computation and writes CSV or JSON to ``--output``
(stdout by default). When tabular output goes to a file the JSON report is
printed on stdout; otherwise the report goes to stderr.

Exit codes: 0 on success, 1 when an invariant check fails or the input
violates a mathematical precondition, 2 for malformed or missing input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings

import numpy as np

from .infinite_product import (
    NotNormalizedError,
    R1ExceedsOne,
    cascade_constant,
    check_normalized,
    father_hat,
    l2_norm_estimate,
    product_along_points,
    toeplitz_norm_estimate,
    toeplitz_section,
)
from .io import (
    FormatError,
    encode_matrix,
    filter_from_dict,
    load_json,
    realization_from_dict,
    realization_to_dict,
)
from .linalg_kernel import SingularMatrixError, operator_norm, spectral_radius
from .markov import autocorrelation_closed, default_kcut
from .realization import NotContractiveError, Realization, observability_gramian, y_vector
from .ruelle import (
    Window,
    aliased_coefficients,
    coefficients_for_window,
    default_window,
    r1_deviation,
    slanted_matrix,
    trace_coefficients,
    trace_realization,
    trace_spectral,
)
from .wavelet import (
    CONVENTIONS,
    ContractiveWarning,
    build_filter,
    filter_realization,
    identity_inner,
    lowpass_symbol,
    preset_daubechies4,
    preset_haar,
)

SEED_ENV = "RUELLE_REALIZE_SEED"
REALIZATION_PRESETS = {"haar": preset_haar, "daubechies4": preset_daubechies4}
FILTER_PRESETS = {"haar-filter": lambda: (2, identity_inner(2))}


class CheckFailed(Exception):
    """An invariant check failed; carries the report to emit."""

    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report


def fmt(x: float) -> str:
    # adding 0.0 turns -0.0 into 0.0
    return format(float(x) + 0.0, ".17g")


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# input handling


def _load_source(args):
    """``("filter", N, inner)`` or ``("realization", r)``."""
    if args.input and args.preset:
        raise FormatError("give either --input or --preset, not both")
    if args.preset:
        if args.preset in FILTER_PRESETS:
            return ("filter",) + FILTER_PRESETS[args.preset]()
        return ("realization", REALIZATION_PRESETS[args.preset]())
    if not args.input:
        raise FormatError("an --input file or a --preset is required")
    doc = load_json(args.input)
    if "N" in doc or "leftConstant" in doc or "factors" in doc:
        return ("filter",) + filter_from_dict(doc)
    if "A" in doc or "D" in doc:
        return ("realization", realization_from_dict(doc))
    raise FormatError(f"{args.input}: neither a realization nor a filter document")


def _scaling(args, source) -> int:
    if source[0] == "filter":
        N = source[1]
        if args.N is not None and args.N != N:
            raise FormatError(f"--N {args.N} disagrees with the filter's N = {N}")
        return N
    N = 2 if args.N is None else args.N
    if N < 2:
        raise FormatError(f"--N must be at least 2, got {N}")
    return N


def _build(source, N: int):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ContractiveWarning)
        return build_filter(source[2], N)


def _symbol(args, source, N: int) -> Realization:
    """The scalar low-pass symbol in the requested convention."""
    if source[0] == "filter":
        if args.convention is None:
            raise FormatError("--convention is required for a filter input")
        return lowpass_symbol(_build(source, N), args.convention)
    m = source[1]
    if args.preset and args.convention == "paper-polyphase":
        # presets are stored with m(1) = 1
        m = m.scaled(np.sqrt(N))
    return m


def _parse_ints(text: str, count: int, name: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise FormatError(f"--{name} must be {count} comma-separated integers, got {text!r}") from exc
    if len(vals) != count:
        raise FormatError(f"--{name} must be {count} comma-separated integers, got {text!r}")
    return vals


def _parse_grid(text: str) -> np.ndarray:
    parts = text.split(",")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except (ValueError, IndexError) as exc:
        raise FormatError(f"--grid must be start,stop,count, got {text!r}") from exc
    if len(parts) != 3 or count < 1:
        raise FormatError(f"--grid must be start,stop,count, got {text!r}")
    return np.linspace(start, stop, count)


def _int_grid(args, default: int) -> int:
    if args.grid is None:
        return default
    try:
        n = int(args.grid)
    except ValueError as exc:
        raise FormatError(f"--grid must be a positive integer here, got {args.grid!r}") from exc
    if n < 1:
        raise FormatError(f"--grid must be a positive integer here, got {n}")
    return n


# commands


def cmd_filter_check(args) -> tuple[str, dict | None]:
    source = _load_source(args)
    if source[0] != "filter":
        raise FormatError("filter-check needs a filter document")
    N = _scaling(args, source)
    wf = _build(source, N)
    points = _int_grid(args, 64)
    tol = 1e-9 if args.tol is None else args.tol
    unitarity = wf.unitarity_residual(points)
    normalization = wf.normalization_residual()
    m = lowpass_symbol(wf, args.convention)
    target = 1.0 if args.convention == "paper-polyphase" else 1.0 / N
    deviation = r1_deviation(m, N, target, 32)
    report = {
        "N": N,
        "convention": args.convention,
        "unitarity_residual": unitarity,
        "normalization_residual": normalization,
        "r1_target": target,
        "r1_deviation": deviation,
        "tol": tol,
        "symbol": realization_to_dict(m),
    }
    ok = unitarity <= max(tol, 1e-8) and normalization <= tol and deviation <= tol
    report["ok"] = bool(ok)
    if not ok:
        raise CheckFailed("filter check failed", report)
    return _dumps(report), None


def cmd_markov(args):
    source = _load_source(args)
    N = _scaling(args, source)
    m = _symbol(args, source, N) if source[0] == "filter" else source[1]
    nmax = 10 if args.nmax is None else args.nmax
    if nmax < 0:
        raise FormatError("--nmax must be non-negative")
    G = observability_gramian(m)
    c = autocorrelation_closed(m, nmax, gram=G)
    lines = [
        f"# Gamma = {json.dumps(encode_matrix(G) if G.size else [])}",
        f"# Y = {json.dumps(encode_matrix(y_vector(m, G)) if G.size else [])}",
    ]
    scalar = c.block_shape == (1, 1)
    lines.append("n,re,im" if scalar else "n,row,col,re,im")
    for n, block in zip(c.indices, c.values):
        if scalar:
            lines.append(f"{n},{fmt(block[0, 0].real)},{fmt(block[0, 0].imag)}")
            continue
        for (i, j), v in np.ndenumerate(block):
            lines.append(f"{n},{i},{j},{fmt(v.real)},{fmt(v.imag)}")
    return "\n".join(lines) + "\n", None


def _trace_report(m: Realization, N: int, tol: float, convention: str) -> dict:
    if m.shape != (1, 1):
        raise FormatError("trace needs a scalar symbol")
    rho = spectral_radius(m.A) if m.state_dim else 0.0
    nmax = N * (default_kcut(m) + 2) if m.state_dim else N
    c = autocorrelation_closed(m, nmax)
    spectral = trace_spectral(m, N)
    aliased = aliased_coefficients(c, N)
    return {
        "N": N,
        "convention": convention,
        "spectral_radius": rho,
        "trace_spectral": spectral,
        "trace_coefficients": aliased,
        "difference": abs(spectral - aliased),
        "slanted_diagonal": trace_coefficients(c, N),
        "trace_realization": trace_realization(m, N),
        "tol": tol,
    }


def _check_trace(report: dict):
    report["ok"] = bool(report["difference"] <= report["tol"])
    if not report["ok"]:
        raise CheckFailed("trace formulas disagree", report)


def cmd_ruelle(args):
    source = _load_source(args)
    N = _scaling(args, source)
    m = _symbol(args, source, N)
    if m.shape != (1, 1):
        raise FormatError("ruelle needs a scalar symbol")
    rho = spectral_radius(m.A) if m.state_dim else 0.0
    if args.window:
        window = Window(*_parse_ints(args.window, 4, "window"))
    else:
        window = default_window(rho, N, 2)
    op = slanted_matrix(coefficients_for_window(m, N, window), N, window)
    tol = 1e-10 if args.tol is None else args.tol
    report = _trace_report(m, N, tol, args.convention)
    report["window"] = list(window)
    report["entries"] = len(op)
    _check_trace(report)
    if args.format == "json":
        body = _dumps({"N": N, "window": list(window), "dense": encode_matrix(op.to_dense())})
    else:
        lines = ["l,k,re,im"]
        lines += [f"{l},{k},{fmt(v.real)},{fmt(v.imag)}" for l, k, v in op.triplets()]
        body = "\n".join(lines) + "\n"
    return body, report


def cmd_trace(args):
    source = _load_source(args)
    N = _scaling(args, source)
    m = _symbol(args, source, N)
    tol = 1e-10 if args.tol is None else args.tol
    report = _trace_report(m, N, tol, args.convention)
    _check_trace(report)
    return _dumps(report), None


def _unit_dc_symbol(args, source, N: int) -> Realization:
    if args.convention != "unit-dc":
        raise NotNormalizedError("the cascade needs the unit-dc convention (m(1) = 1)")
    m = _symbol(args, source, N)
    if m.shape != (1, 1):
        raise FormatError("the cascade needs a scalar symbol")
    check_normalized(m)
    return m


def cmd_cascade(args):
    source = _load_source(args)
    N = _scaling(args, source)
    m = _unit_dc_symbol(args, source, N)
    ws = _parse_grid(args.grid or "-4,4,513")
    tol = 1e-12 if args.tol is None else args.tol
    cert = l2_norm_estimate(m, N, kmax=4)
    K1 = cascade_constant(m)
    lines = ["w,re,im,abs"]
    for w in ws:
        v = father_hat(m, N, float(w), tol, K1)
        lines.append(f"{fmt(w)},{fmt(v.real)},{fmt(v.imag)},{fmt(abs(v))}")
    summary = {
        "N": N,
        "certificate": cert.certificate,
        "bounded": cert.bounded,
        "r1_max": cert.r1_max,
        "r1_check": "pass",
        "K1": K1,
        "tol": tol,
    }
    lines.append(f"# certificate={fmt(cert.certificate)} bounded={str(cert.bounded).lower()} "
                 f"r1_max={fmt(cert.r1_max)} r1_check=pass")
    if not cert.bounded:
        raise CheckFailed("partial-product integrals grow with k", summary)
    return "\n".join(lines) + "\n", summary


def cmd_l2check(args):
    source = _load_source(args)
    N = _scaling(args, source)
    m = _unit_dc_symbol(args, source, N)
    kmax = 4 if args.kmax is None else args.kmax
    if kmax < 0:
        raise FormatError("--kmax must be non-negative")
    cert = l2_norm_estimate(m, N, kmax=kmax, quad_points=_int_grid(args, 64))
    lines = ["k,integral"]
    lines += [f"{k},{fmt(v)}" for k, v in enumerate(cert.integrals)]
    lines.append(f"# certificate={fmt(cert.certificate)} bounded={str(cert.bounded).lower()} "
                 f"r1_max={fmt(cert.r1_max)}")
    summary = {"N": N, "integrals": list(cert.integrals), "certificate": cert.certificate,
               "bounded": cert.bounded, "r1_max": cert.r1_max}
    if not cert.bounded:
        raise CheckFailed("partial-product integrals grow with k", summary)
    return "\n".join(lines) + "\n", summary


def _seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError as exc:
        raise FormatError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc


def cmd_product_demo(args):
    source = _load_source(args)
    N = _scaling(args, source)
    if source[0] == "filter":
        M = filter_realization(_build(source, N))
    else:
        M = _symbol(args, source, N)
    check_normalized(M)
    n = 8 if args.nmax is None else args.nmax
    if n < 1:
        raise FormatError("--nmax (number of factors) must be positive")
    tol = 1e-9 if args.tol is None else args.tol
    rng = np.random.default_rng(_seed())
    ks = np.arange(1, n + 1)
    point_sets = {
        "dyadic": np.exp(1j * np.pi / 2.0 ** ks),
        "random": np.exp(1j * rng.uniform(-np.pi, np.pi, n) / 2.0 ** ks),
    }
    rho_d = spectral_radius(M.D) if M.D.size else 0.0
    bounded = rho_d < 1 - 1e-9
    section = toeplitz_section(M, n, check_bounded=False)
    report = {"N": N, "factors": n, "seed": _seed(), "rho_D": rho_d,
              "toeplitz_bounded": bounded, "tol": tol, "points": {}}
    if bounded:
        report["symbol_norm"] = toeplitz_norm_estimate(M, _int_grid(args, 256))
        report["section_norm"] = operator_norm(section.mat_a)
    ok = True
    for name, zs in point_sets.items():
        direct = product_along_points(M, zs, grid=_int_grid(args, 64))
        via_section = section.evaluate(zs)
        diff = float(np.linalg.norm(direct.value - via_section))
        ok &= diff <= tol
        report["points"][name] = {
            "z": [[float(z.real), float(z.imag)] for z in zs],
            "direct": encode_matrix(direct.value),
            "section": encode_matrix(via_section),
            "difference": diff,
            "K": direct.K,
            "tail_bound": direct.bound,
            "cut": direct.cut,
        }
    report["ok"] = bool(ok)
    if not ok:
        raise CheckFailed("section value differs from the direct product", report)
    return _dumps(report), None


COMMANDS = {
    "filter-check": (cmd_filter_check, "unitarity, normalization and R1 checks for a filter", True),
    "markov": (cmd_markov, "autocorrelation coefficients as CSV", False),
    "ruelle": (cmd_ruelle, "slanted-matrix window and trace report", True),
    "trace": (cmd_trace, "trace of the Ruelle operator by several formulas", True),
    "cascade": (cmd_cascade, "father-wavelet Fourier transform on a w grid", True),
    "l2check": (cmd_l2check, "integrals of the partial products", True),
    "product-demo": (cmd_product_demo, "finite infinite-product section versus direct product", False),
}

# commands whose main output is the JSON report itself
REPORT_COMMANDS = {"filter-check", "trace", "product-demo"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ruelle-realize", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text, needs_convention) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--input", help="realization or filter JSON")
        p.add_argument("--preset", choices=sorted(REALIZATION_PRESETS) + sorted(FILTER_PRESETS))
        p.add_argument("--output", help="output file (default stdout)")
        p.add_argument("--N", type=int, help="scaling number (default 2, or the filter's N)")
        p.add_argument("--tol", type=float)
        p.add_argument("--convention", choices=CONVENTIONS, required=needs_convention)
        p.add_argument("--grid", help="circle points, or start,stop,count for cascade "
                            "(write --grid=-4,4,513 when start is negative)")
        p.add_argument("--window", help="l_min,l_max,k_min,k_max")
        p.add_argument("--nmax", type=int, help="coefficient range, or number of factors")
        p.add_argument("--kmax", type=int, help="largest partial-product index")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def _write(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    func = COMMANDS[args.command][0]
    report_stream = sys.stdout if args.output else sys.stderr
    try:
        body, report = func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        if exc.report is not None:
            if args.command in REPORT_COMMANDS:
                _write(_dumps(exc.report), args.output)
            else:
                report_stream.write(_dumps(exc.report))
        return 1
    except (NotContractiveError, NotNormalizedError, R1ExceedsOne,
            SingularMatrixError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _write(body, args.output)
    if report is not None:
        report_stream.write(_dumps(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())
