"""Randomized properties (hypothesis) on small discretizations."""

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from spectriples import (build_halfline_m1, build_interval_m1, build_interval_m2, calderon,
                         weyl_function)
from spectriples.config import parse_config, serialize_config
from spectriples.counting import check_negative_count, count_negative_formula
from spectriples.numerics import inertia, ldl_inertia
from spectriples.schatten import fit_decay_exponent

SETTINGS = settings(max_examples=25, deadline=None,
                    suppress_health_check=[HealthCheck.function_scoped_fixture])

INTERVAL = build_interval_m1(1.0, 200, 1.0)
HALFLINE = build_halfline_m1(20.0, 400, 1.0)
BEAM = build_interval_m2(1.0, 100, 1.0)

sigmas = st.floats(-6.0, 3.0, allow_nan=False).filter(lambda s: abs(abs(s) - 1.0) > 1e-3)


@SETTINGS
@given(sigmas)
def test_halfline_count_formula_equals_direct(sigma):
    rep = check_negative_count(HALFLINE, sigma)
    assert rep.agree
    assert rep.formula_count == int(sigma < -1.0)


@SETTINGS
@given(st.floats(-8.0, 2.0), st.floats(-8.0, 2.0))
def test_count_is_monotone_in_sigma(a, b):
    lo, hi = min(a, b), max(a, b)
    assert (count_negative_formula(INTERVAL, lo).formula_count
            >= count_negative_formula(INTERVAL, hi).formula_count)


@SETTINGS
@given(st.lists(st.floats(-30.0, 30.0), min_size=10, max_size=10))
def test_m2_dense_k_formula_equals_direct(entries):
    # Hermitian K with modest derivative-trace block keeps every trace mode resolvable
    A = np.array(entries[:4])
    off = np.array(entries[4:10])
    K = np.diag(A)
    iu = np.triu_indices(4, 1)
    K[iu] = off
    K = K + np.triu(K, 1).T
    rep = check_negative_count(BEAM, K)
    if rep.context["unresolved_trace_modes"] == 0 and not rep.ambiguous:
        assert rep.agree


@SETTINGS
@given(st.floats(-5.0, 5.0), st.floats(0.05, 5.0))
def test_herglotz_and_symmetry(x, y):
    z = complex(x, y)
    M = weyl_function(INTERVAL, z).matrix
    assert np.min(np.linalg.eigvalsh((M - M.conj().T) / 2j)) > 0
    np.testing.assert_allclose(weyl_function(INTERVAL, z.conjugate()).matrix, M.conj().T,
                               atol=1e-10)


@SETTINGS
@given(st.floats(-20.0, 5.0), st.floats(-20.0, 5.0))
def test_calderon_monotone_below_dirichlet_spectrum(a, b):
    lo, hi = min(a, b), max(a, b)
    D = calderon(INTERVAL, hi).matrix - calderon(INTERVAL, lo).matrix
    assert np.min(np.linalg.eigvalsh(D)) >= -1e-10


@SETTINGS
@given(st.integers(1, 12), st.integers(0, 2**31 - 1))
def test_inertia_agrees_with_ldl(n, seed):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    H = G + G.conj().T
    inr = inertia(H)
    if inr.n_zero == 0:
        assert (inr.n_minus, inr.n_plus) == ldl_inertia(H)
    assert inr.dimension == n


@SETTINGS
@given(st.floats(0.2, 5.0), st.floats(0.1, 10.0))
def test_fit_exact_power_law(a, c):
    s = c * np.arange(1, 200, dtype=float) ** -a
    assert fit_decay_exponent(s, floor=0.0).fitted_exponent == pytest.approx(a, rel=1e-8)


@SETTINGS
@given(st.integers(10, 5000), st.floats(-10, 10, allow_nan=False), st.integers(0, 10**6))
def test_config_round_trip(N, sigma, seed):
    text = f"""
[problem]
kind = interval_m1
length = 1
N = {N}

[k]
type = scalar
sigma = {sigma!r}

[task]
name = count
seed = {seed}
"""
    cfg = parse_config(text)
    assert parse_config(serialize_config(cfg)) == cfg
