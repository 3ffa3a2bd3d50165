import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ruelle_realize.realization import evaluate, minimize
from ruelle_realize.ruelle import r1_deviation
from ruelle_realize.wavelet import (
    BlaschkeFactor,
    ContractiveWarning,
    RationalInner,
    assemble_inner,
    blaschke_factor_realization,
    build_filter,
    check_convention,
    delay_column,
    delta_eval,
    delta_realization,
    dft_matrix,
    filter_realization,
    fir_realization,
    identity_inner,
    lowpass_symbol,
    polyphase_realization,
    preset_daubechies4,
    preset_haar,
    random_projection,
    random_rational_inner,
    unitarity_residual,
)

ZS = np.exp(2j * np.pi * np.array([0.1, 0.37, 0.5, 0.81]))


@pytest.mark.parametrize("N", [1, 2, 3, 4, 8])
def test_dft_unitary(N):
    V = dft_matrix(N)
    np.testing.assert_allclose(V.conj().T @ V, np.eye(N), atol=1e-14)


def test_check_convention():
    assert check_convention("unit-dc") == "unit-dc"
    with pytest.raises(ValueError):
        check_convention("other")


@pytest.mark.parametrize("N", [2, 3, 5])
def test_delay_column(N):
    r = delay_column(N)
    for z in ZS:
        np.testing.assert_allclose(evaluate(r, z)[:, 0], z ** -np.arange(N), atol=1e-14)


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_delta_realization(N):
    r = delta_realization(N)
    assert r.state_dim == N * (N - 1) // 2
    for z in ZS:
        np.testing.assert_allclose(evaluate(r, z), delta_eval(N, z), atol=1e-14)


@pytest.mark.parametrize("a", [0.0, 0.5, -0.3 + 0.4j, 0.8j])
def test_blaschke_factor(rng, a):
    P = random_projection(3, 2, rng)
    f = BlaschkeFactor(a, P)
    r = blaschke_factor_realization(f)
    assert r.state_dim == 2
    np.testing.assert_allclose(evaluate(r, 1.0), np.eye(3), atol=1e-13)
    k = (1 - a) / (1 - np.conj(a))
    for z in ZS:
        beta = k * (1 - np.conj(a) * z) / (z - a)
        np.testing.assert_allclose(evaluate(r, z), np.eye(3) - P + beta * P, atol=1e-12)
    assert unitarity_residual(lambda z: evaluate(r, z), 3) < 1e-12


def test_blaschke_rejects_outside_pole():
    with pytest.raises(ValueError):
        blaschke_factor_realization(BlaschkeFactor(1.2, np.eye(2)))


def test_blaschke_rejects_non_projection():
    with pytest.raises(ValueError):
        blaschke_factor_realization(BlaschkeFactor(0.2, [[1.0, 1.0], [0.0, 0.0]]))


def test_assemble_rejects_large_radius(rng):
    inner = RationalInner((BlaschkeFactor(0.99, random_projection(2, 1, rng)),), np.eye(2))
    with pytest.raises(ValueError):
        assemble_inner(inner)


def test_inner_size_mismatch():
    with pytest.raises(ValueError):
        RationalInner((BlaschkeFactor(0.1, np.eye(3)),), np.eye(2))


@given(st.integers(2, 4), st.integers(0, 3), st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_filter_invariants(N, nfactors, seed):
    rng = np.random.default_rng(seed)
    wf = build_filter(random_rational_inner(N, nfactors, rng))
    assert wf.unitarity_residual() < 1e-8
    assert wf.normalization_residual() < 1e-10
    for conv, target in (("paper-polyphase", 1.0), ("unit-dc", 1.0 / N)):
        m = lowpass_symbol(wf, conv)
        assert r1_deviation(m, N, target, points=32) < 1e-9


@pytest.mark.parametrize("N", [2, 3, 4])
def test_polyphase_realization_matches_column(rng, N):
    wf = build_filter(random_rational_inner(N, 2, rng))
    col = polyphase_realization(wf)
    for z in ZS:
        np.testing.assert_allclose(evaluate(col, z)[:, 0], wf.polyphase_column(z), atol=1e-12)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_filter_realization_matches(rng, N):
    wf = build_filter(random_rational_inner(N, 2, rng))
    R = filter_realization(wf)
    for z in ZS:
        np.testing.assert_allclose(evaluate(R, z), wf(z), atol=1e-12)
    np.testing.assert_allclose(evaluate(R, 1.0), np.eye(N), atol=1e-12)


@pytest.mark.parametrize("N", [2, 3])
def test_first_row_of_filter_is_symbol(rng, N):
    # the symbol is the first entry of the polyphase column
    wf = build_filter(random_rational_inner(N, 1, rng))
    m = lowpass_symbol(wf, "paper-polyphase")
    for z in ZS:
        assert evaluate(m, z)[0, 0] == pytest.approx(wf.polyphase_column(z)[0], abs=1e-12)


def test_identity_inner_gives_haar():
    wf = build_filter(identity_inner(2))
    m = lowpass_symbol(wf, "paper-polyphase")
    for z in ZS:
        assert evaluate(m, z)[0, 0] == pytest.approx((1 + 1 / z) / np.sqrt(2), abs=1e-14)
    assert evaluate(m, 1.0)[0, 0] == pytest.approx(np.sqrt(2), abs=1e-14)
    u = lowpass_symbol(wf, "unit-dc")
    for z in ZS:
        assert evaluate(u, z)[0, 0] == pytest.approx(evaluate(preset_haar(), z)[0, 0], abs=1e-14)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_identity_inner_filter(N):
    wf = build_filter(identity_inner(N))
    assert wf.unitarity_residual() < 1e-12
    assert wf.normalization_residual() < 1e-12
    m = lowpass_symbol(wf, "paper-polyphase")
    assert r1_deviation(m, N, 1.0) < 1e-12


def test_non_unitary_warns():
    inner = RationalInner((), np.diag([2.0, 1.0]))
    with pytest.warns(ContractiveWarning):
        wf = build_filter(inner)
    assert wf.unitarity_residual() > 1e-3


def test_build_filter_size_mismatch():
    with pytest.raises(ValueError):
        build_filter(identity_inner(2), N=3)


def test_symbol_is_minimal(rng):
    wf = build_filter(random_rational_inner(2, 2, rng))
    m = lowpass_symbol(wf, "unit-dc")
    assert minimize(m).state_dim == m.state_dim


@pytest.mark.parametrize("taps", [[1.0], [0.5, 0.5], [1, 2, 3, 4j]])
def test_fir_realization(taps):
    r = fir_realization(taps)
    for z in ZS:
        expected = sum(t * z ** -n for n, t in enumerate(taps))
        assert evaluate(r, z)[0, 0] == pytest.approx(expected, abs=1e-13)


@pytest.mark.parametrize("preset", [preset_haar, preset_daubechies4])
def test_presets_are_unit_dc(preset):
    m = preset()
    assert evaluate(m, 1.0)[0, 0] == pytest.approx(1.0, abs=1e-15)
    assert evaluate(m, -1.0)[0, 0] == pytest.approx(0.0, abs=1e-15)
    assert r1_deviation(m, 2, 0.5) < 1e-12


def test_random_inner_is_unitary(rng):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for N in (2, 3):
            inner = random_rational_inner(N, 3, rng)
            assert unitarity_residual(lambda z: evaluate(assemble_inner(inner), z), N) < 1e-10
