import numpy as np
import pytest

from spectriples import (build_annulus_m1, build_halfline_m1, build_interval_m1, calderon,
                         green_residual, pz_solve, smoothing_operator, t_operator, weyl_function)
from spectriples.boundary import fd_weights, sampled_traces, trace_maps
from spectriples.errors import DirichletEigenvalueHit
from spectriples.realizations import dirichlet_realization, spectrum


def _mode_value(op, k):
    return np.diag(op.matrix)[np.flatnonzero(op.modes() == k)[0]]


# closed forms


def test_halfline_calderon_is_minus_sqrt(halfline):
    L = calderon(halfline, 0.0)
    assert L.shape == (1, 1)
    assert abs(L.matrix[0, 0] + 1.0) < 1e-4


@pytest.mark.parametrize("x", [-4.0, -2.0, -0.5])
def test_halfline_calderon_below_spectrum(x):
    p = build_halfline_m1(20.0, 4000, 1.0)
    assert abs(calderon(p, x).matrix[0, 0] + np.sqrt(1.0 - x)) < 1e-4


def test_interval_calderon_coth_sinh(interval):
    L = calderon(interval, 0.0).matrix
    c, s = 1.0 / np.tanh(1.0), 1.0 / np.sinh(1.0)
    np.testing.assert_allclose(L, [[-c, s], [s, -c]], atol=1e-4)


def test_interval_refinement_is_second_order():
    c, s = 1.0 / np.tanh(1.0), 1.0 / np.sinh(1.0)
    exact = np.array([[-c, s], [s, -c]])
    errs = [np.max(np.abs(calderon(build_interval_m1(1.0, N, 1.0), 0.0).matrix - exact))
            for N in (100, 200, 400)]
    slope = -np.polyfit(np.log([100, 200, 400]), np.log(errs), 1)[0]
    assert abs(slope - 2.0) < 0.2


def test_annulus_mode_values():
    a = build_annulus_m1(1.0, 2.0, 2000, 8, 0.0)
    L = calderon(a, 0.0)
    expected = {0: -1 / np.log(2.0), 1: -5.0 / 3.0, 2: -34.0 / 15.0}
    for k, v in expected.items():
        assert abs(_mode_value(L, k) - v) < 1e-4
        assert _mode_value(L, k) == pytest.approx(_mode_value(L, -k), rel=1e-12)


def test_ball_degree_zero(ball):
    L = calderon(ball, 0.0)
    assert abs(_mode_value(L, 0) + 2.0) < 1e-2
    assert np.max(L.eigenvalues()) < 0


# structural properties


@pytest.mark.parametrize("name", ["halfline", "interval", "beam", "annulus", "ball"])
def test_lambda0_hermitian_negative(name, request):
    p = request.getfixturevalue(name)
    L = calderon(p, 0.0)
    assert L.hermitian_defect <= 1e-8
    assert np.max(L.eigenvalues()) < 0


def test_weyl_at_zero_is_exactly_zero(interval_small, annulus):
    for p in (interval_small, annulus):
        assert np.all(weyl_function(p, 0.0).matrix == 0)


@pytest.mark.parametrize("name", ["halfline_small", "interval_small", "annulus", "beam"])
@pytest.mark.parametrize("z", [1j, 1 + 1j, -2 + 0.5j])
def test_herglotz(name, z, request):
    p = request.getfixturevalue(name)
    M = weyl_function(p, z).matrix
    assert np.min(np.linalg.eigvalsh((M - M.conj().T) / 2j)) > 0


def test_conjugate_symmetry(interval_small):
    Mp = weyl_function(interval_small, 1j).matrix
    Mm = weyl_function(interval_small, -1j).matrix
    np.testing.assert_allclose(Mm, Mp.conj().T, atol=1e-12)


def test_monotone_below_spectrum(halfline_small):
    xs = [-4.0, -2.0, -1.0, -0.5]
    vals = [calderon(halfline_small, x).matrix[0, 0] for x in xs]
    assert np.all(np.diff(vals) >= 0)


def test_t_decays_like_inverse_mode():
    a = build_annulus_m1(1.0, 2.0, 400, 32, 0.0)
    T = t_operator(a, -1.0)
    ks = np.array([4, 8, 16, 32])
    scaled = np.array([k * abs(_mode_value(T, k)) for k in ks])
    # k |T_k| settles near 1/2, so |T_k| is O(1/k) and not faster
    assert np.all(np.abs(scaled - 0.5) < 0.15)
    assert np.all(np.diff(scaled) < 0)


def test_smoothing_operator_on_circle(annulus):
    S = smoothing_operator(annulus, "m")
    assert _mode_value(S, 2) == pytest.approx(5.0 ** 0.25, rel=1e-14)
    assert _mode_value(S, 0) == 1.0
    Smu = smoothing_operator(annulus, "mu")
    # m = 1, single Dirichlet trace: both sides carry exponent 1/4
    np.testing.assert_allclose(Smu.matrix, S.matrix)


def test_smoothing_is_identity_in_one_dimension(beam):
    np.testing.assert_array_equal(smoothing_operator(beam, "m").matrix, np.eye(4))


# solution operator, traces and Green's identity


def test_pz_solve_matches_exponential(halfline):
    u = pz_solve(halfline, 0.0, np.array([1.0]))
    x = halfline.grid
    mask = x < 10
    assert np.max(np.abs(u[mask] - np.exp(-x[mask]))) < 1e-5
    assert u[-1] == 0


def test_pz_solve_traces(interval):
    phi = np.array([0.3, -1.2])
    u = pz_solve(interval, 0.0, phi)
    Bu, Cu = sampled_traces(interval, u)
    np.testing.assert_allclose(Bu, phi, atol=1e-14)
    np.testing.assert_allclose(Cu, calderon(interval, 0.0).matrix @ phi, atol=1e-4)


def test_pz_solve_rejects_wrong_length(interval_small):
    with pytest.raises(ValueError):
        pz_solve(interval_small, 0.0, np.ones(3))


def test_dirichlet_eigenvalue_hit(interval_small):
    lam = spectrum(dirichlet_realization(interval_small), (0, 50)).eigenvalues[0]
    with pytest.raises(DirichletEigenvalueHit):
        calderon(interval_small, float(lam))


def test_fd_weights_exact_on_polynomials():
    w = fd_weights(np.arange(4), 2)
    x = np.arange(4.0)
    assert w @ x**2 == pytest.approx(2.0)
    assert abs(w @ x) < 1e-12 and abs(w @ np.ones(4)) < 1e-12


def test_green_compact_probes(interval_small):
    x = interval_small.grid
    u = np.exp(-1 / np.maximum(1e-300, 1 - ((x - 0.5) / 0.2) ** 2)) * (np.abs(x - 0.5) < 0.2)
    v = np.cos(5 * x) * u[::-1]
    assert green_residual(interval_small, u, v, relative=True) < 1e-12


def test_green_smooth_probes_converge():
    res = []
    for N in (100, 200, 400):
        p = build_interval_m1(1.0, N, 1.0)
        x = p.grid
        res.append(green_residual(p, np.sin(np.pi * x / 2), np.cos(3 * x)))
    slope = -np.polyfit(np.log([100, 200, 400]), np.log(res), 1)[0]
    assert slope >= 1.8


def test_trace_maps_regularized_gamma1_vanishes_on_solutions(interval):
    tm = trace_maps(interval)
    u = pz_solve(interval, 0.0, np.array([1.0, 2.0]))
    assert np.max(np.abs(tm.gamma1(u))) < 1e-4
    np.testing.assert_allclose(tm.gamma0(u), [1.0, 2.0], atol=1e-14)
