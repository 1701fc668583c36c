import numpy as np
import pytest

from spectriples import Potential, dirichlet_realization, spectrum
from spectriples.errors import InvalidConfig
from spectriples.problems import (BUILDERS, build_annulus_m1, build_halfline_m1,
                                  build_interval_m2)


def test_potential_presets():
    x = np.array([0.0, np.pi / 2])
    assert np.allclose(Potential.mathieu(2, 3)(x), [5.0, 1.0])
    well = Potential.well(depth=3, width=1, background=1)
    assert np.allclose(well(np.array([0.5, 2.0])), [-2.0, 1.0])
    assert well.lower_bound() == -2.0 and well.at_infinity() == 1.0
    assert Potential.mathieu().at_infinity() is None
    tab = Potential.tabulated([0, 1], [0, 2])
    assert tab(np.array([0.5]))[0] == pytest.approx(1.0)


@pytest.mark.parametrize("bad", [lambda: Potential.well(1, 0),
                                 lambda: Potential.tabulated([0, 0], [1, 1])])
def test_potential_validation(bad):
    with pytest.raises(InvalidConfig):
        bad()


def test_builders_registry():
    assert set(BUILDERS) == {"interval_m1", "halfline_m1", "interval_m2", "annulus_m1",
                             "ball_exterior_m1"}


def test_interval_dirichlet_eigenvalues(interval):
    ev = spectrum(dirichlet_realization(interval), (0, 160)).eigenvalues
    exact = 1 + (np.pi * np.arange(1, 5)) ** 2
    assert len(ev) == 4
    assert np.allclose(ev, exact, rtol=1e-4)


def test_stiffness_symmetric_for_all_kinds(interval_small, beam, annulus, ball, halfline_small):
    for p in (interval_small, beam, annulus, ball, halfline_small):
        for b in p.blocks:
            S = b.stiffness
            assert abs(S - S.T).max() < 1e-9 * abs(S).max()


def test_boundary_bookkeeping(interval_small, beam, annulus, ball, halfline_small):
    assert interval_small.reduced_boundary_size == 2
    assert halfline_small.reduced_boundary_size == 1
    assert beam.reduced_boundary_size == 4
    assert list(beam.boundary_trace_orders) == [0, 0, 1, 1]
    assert annulus.reduced_boundary_size == 33
    assert ball.boundary_dimension == sum(2 * l + 1 for l in range(7))


def test_halfline_needs_positive_potential_at_infinity():
    with pytest.raises(InvalidConfig):
        build_halfline_m1(20, 400, Potential.constant(-1.0))


def test_mode_limits():
    with pytest.raises(InvalidConfig):
        build_annulus_m1(1, 2, 100, 4, 0.0)


def test_clamped_beam_lowest_eigenvalue():
    # clamped-clamped beam: (4.730040745)^4 plus q = 1
    p = build_interval_m2(1.0, 400, 1.0)
    ev = spectrum(dirichlet_realization(p), (0, 1000)).eigenvalues
    assert ev[0] == pytest.approx(4.730040744862704**4 + 1, rel=5e-3)


def test_ball_degree_multiplicity(ball):
    assert [b.multiplicity for b in ball.blocks] == [2 * l + 1 for l in range(7)]
    assert ball.laplace_beltrami(2) == pytest.approx(6.0)


def test_annulus_laplace_beltrami(annulus):
    assert annulus.laplace_beltrami(3) == pytest.approx(9.0)
