from fractions import Fraction

import numpy as np
import pytest

from spectriples import (DecayFit, build_annulus_m1, build_interval_m1, build_interval_m2,
                         difference_singular_values, dirichlet_realization, fit_decay_exponent,
                         predicted_schatten_exponent, realization_with_K,
                         resolvent_power_difference, schatten_verdict,
                         spectrum)
from spectriples.errors import InsufficientTail, InvalidCombination, SpectrumHit
from spectriples.numerics import singular_values
from spectriples.schatten import numerical_rank


@pytest.fixture(scope="module")
def annulus_pair():
    p = build_annulus_m1(1.0, 2.0, 400, 32, 0.0)
    return realization_with_K(p, -1.0), dirichlet_realization(p)


# predicted exponents and verdicts


@pytest.mark.parametrize("n,m,ell,cls,expected", [
    (2, 1, 1, "elliptic", Fraction(1, 2)),
    (2, 1, 2, "elliptic", Fraction(1, 4)),
    (3, 1, 1, "elliptic", Fraction(1)),
    (2, 1, 1, "general", Fraction(2, 3)),
    (3, 2, 1, "dirichlet_bounded", Fraction(1, 2)),
])
def test_predicted_exponent(n, m, ell, cls, expected):
    assert predicted_schatten_exponent(n, m, ell, cls) == expected


def test_predicted_exponent_errors():
    with pytest.raises(InvalidCombination):
        predicted_schatten_exponent(2, 1, 2, "dirichlet_bounded")
    with pytest.raises(InvalidCombination):
        predicted_schatten_exponent(1, 1, 1, "elliptic")
    with pytest.raises(InvalidCombination):
        predicted_schatten_exponent(2, 1, 1, "other")


def test_verdict_margin():
    p = Fraction(1, 2)
    assert schatten_verdict(DecayFit(1.9, 1.0, (1, 10), p)) == "pass"
    assert schatten_verdict(DecayFit(1.8, 1.0, (1, 10), p)) == "fail"
    assert schatten_verdict(DecayFit(1.8, 1.0, (1, 10), p), margin=0.25) == "pass"
    with pytest.raises(InvalidCombination):
        schatten_verdict(DecayFit(1.0, 1.0, (1, 10)))


# decay fits on synthetic sequences


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0, 4.0])
def test_fit_recovers_power_law(a):
    s = np.arange(1, 401, dtype=float) ** -a
    fit = fit_decay_exponent(s)
    assert fit.fitted_exponent == pytest.approx(a, abs=1e-10)
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_window_and_floor():
    s = np.concatenate([np.arange(1, 101, dtype=float) ** -2.0, np.full(50, 1e-16)])
    fit = fit_decay_exponent(s)
    assert fit.window == (11, 100)
    assert fit_decay_exponent(s, tail_fraction=0.5).window == (56, 100)


def test_fit_needs_enough_points():
    with pytest.raises(InsufficientTail):
        fit_decay_exponent(np.arange(1, 6, dtype=float) ** -1.0)
    with pytest.raises(InsufficientTail):
        fit_decay_exponent(np.zeros(20))


# resolvent differences


def test_identical_pair_has_zero_difference():
    p = build_interval_m1(1.0, 100, 1.0)
    r = realization_with_K(p, -1.0)
    D = resolvent_power_difference(r, r, -1.0)
    assert np.max(np.abs(D)) == 0.0


@pytest.mark.parametrize("builder", [lambda: build_interval_m1(1.0, 200, 1.0),
                                     lambda: build_interval_m2(1.0, 200, 1.0)])
def test_finite_rank_in_one_dimension(builder):
    p = builder()
    D = resolvent_power_difference(realization_with_K(p, -1.0), dirichlet_realization(p), -1.0)
    s = singular_values(D)
    assert numerical_rank(s, 1e-10) <= p.boundary_dimension
    assert s[0] > 0


def test_difference_conjugate_symmetry():
    p = build_interval_m1(1.0, 100, 1.0)
    r1, r2 = realization_with_K(p, -1.0), dirichlet_realization(p)
    Dp = resolvent_power_difference(r1, r2, 1j)
    Dm = resolvent_power_difference(r1, r2, -1j)
    np.testing.assert_allclose(Dm, Dp.conj().T, atol=1e-12)


def test_randomized_matches_dense():
    p = build_interval_m1(1.0, 200, 1.0)
    r1, r2 = realization_with_K(p, -1.0), dirichlet_realization(p)
    dense = singular_values(resolvent_power_difference(r1, r2, -1.0, 2))
    sv = difference_singular_values(r1, r2, -1.0, 2, seed=3)
    np.testing.assert_allclose(sv.values[:4], dense[:4], rtol=1e-8)


def test_spectrum_hit():
    p = build_interval_m1(1.0, 100, 1.0)
    r1 = realization_with_K(p, -1.0)
    lam = float(spectrum(r1, (-10.0, 100.0)).eigenvalues[0])
    with pytest.raises(SpectrumHit):
        resolvent_power_difference(r1, dirichlet_realization(p), lam)


def test_annulus_decay(annulus_pair):
    r1, r2 = annulus_pair
    s1 = difference_singular_values(r1, r2, -1.0, 1)
    s2 = difference_singular_values(r1, r2, -1.0, 2)
    f1 = fit_decay_exponent(s1, predicted_p=Fraction(1, 2))
    f2 = fit_decay_exponent(s2, predicted_p=Fraction(1, 4))
    assert f1.fitted_exponent > 1.7
    assert f2.fitted_exponent > f1.fitted_exponent + 1.0
    # one value per Fourier mode; k and -k coincide
    assert len(s1) == 65
    np.testing.assert_allclose(s1.values[1], s1.values[2], rtol=1e-8)
