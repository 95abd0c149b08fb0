import numpy as np
import pytest
from hypothesis import given, settings

from distorted_premiums import (
    DistortionMeasure,
    dirac,
    distortion_from_measure,
    distortion_from_spec,
    make_cte_distortion,
    make_poly_distortion,
    make_steps_distortion,
    make_table_distortion,
    measure_from_distortion,
)
from distorted_premiums.errors import DistortionError, DomainError, UnsupportedError

from strategies import distortions

GRID = np.linspace(0.0, 1.0, 200)
FIG1 = [0.7, 0.0, 0.9]


def test_cte_identity_case():
    s = make_cte_distortion(0.0)
    assert np.allclose(s(GRID[1:]), 1.0)
    assert s.at(0.0) == 1.0


def test_cte_half():
    s = make_cte_distortion(0.5)
    assert s(0.5) == 0.0 and s(0.75) == 2.0
    assert s.tau(1.0) == pytest.approx(1.0, abs=1e-15)


def test_cte_ninety_tau():
    s = make_cte_distortion(0.9)
    assert s(1.0) == pytest.approx(10.0)
    p = np.array([0.0, 0.5, 0.9, 0.95, 1.0])
    assert np.allclose(s.tau(p), np.maximum(0.0, (p - 0.9) / 0.1), atol=1e-15)


@pytest.mark.parametrize("alpha", [-0.1, 1.0, 1.5])
def test_cte_rejects_bad_level(alpha):
    with pytest.raises(DomainError, match="alpha"):
        make_cte_distortion(alpha)


def test_poly_normalization():
    s = make_poly_distortion(FIG1)
    assert s.tau(1.0) == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(make_poly_distortion([1.0])(GRID), 1.0)


def test_poly_bad_mass():
    with pytest.raises(DistortionError, match="normalization violated"):
        make_poly_distortion([0.5, 0.0, 0.9])


def test_poly_decreasing():
    with pytest.raises(DistortionError, match="monotonicity"):
        make_poly_distortion([1.5, -1.0])


def test_table_decreasing():
    with pytest.raises(DistortionError, match="monotonicity"):
        make_table_distortion([1.5, 0.5])


def test_tau_examples():
    assert make_cte_distortion(0.5).tau(0.75) == pytest.approx(0.5)
    assert make_poly_distortion(FIG1).tau(0.5) == pytest.approx(0.3875, abs=1e-15)


def test_tau_inverse_examples():
    assert make_cte_distortion(0.5).tau_inverse(0.5) == pytest.approx(0.75, abs=1e-15)
    assert make_cte_distortion(0.5).tau_inverse(0.0) == 0.0
    assert make_poly_distortion(FIG1).tau_inverse(0.3875) == pytest.approx(0.5, abs=1e-12)


def test_measure_of_cte():
    mu = measure_from_distortion(make_cte_distortion(0.3))
    assert mu.locations.tolist() == [0.3] and mu.masses.tolist() == [1.0]
    mu0 = measure_from_distortion(make_cte_distortion(0.0))
    assert mu0.locations.tolist() == [0.0] and mu0.masses.tolist() == [1.0]


def test_measure_of_figure_distortion():
    mu = measure_from_distortion(make_poly_distortion(FIG1))
    assert mu.masses.tolist() == [pytest.approx(0.7)]
    a = np.linspace(0, 1, 11)
    assert np.allclose(mu.density(a), (1 - a) * 1.8 * a)
    assert mu.total_mass == pytest.approx(1.0, abs=1e-12)


def test_measure_to_distortion():
    s = distortion_from_measure(dirac(0.4))
    assert s.kind == "cte" and s.levels[0] == 0.4
    assert np.allclose(distortion_from_measure(dirac(0.0))(GRID), 1.0)


def test_round_trip_figure_distortion():
    s = make_poly_distortion(FIG1)
    back = distortion_from_measure(measure_from_distortion(s))
    assert np.max(np.abs(back(GRID) - (0.7 + 0.9 * GRID ** 2))) < 1e-12


def test_atom_at_one_rejected():
    mu = DistortionMeasure(locations=[0.0, 1.0], masses=[0.5, 0.5])
    with pytest.raises(UnsupportedError):
        distortion_from_measure(mu)


def test_spec_round_trip():
    for s in (make_cte_distortion(0.8), make_poly_distortion(FIG1),
              make_steps_distortion([0.2, 0.6], [0.5, 0.5])):
        t = distortion_from_spec(s.to_spec())
        assert np.allclose(s(GRID), t(GRID))
    with pytest.raises(DistortionError, match="lacks field"):
        distortion_from_spec({"kind": "cte"})


def test_left_continuity():
    s = make_cte_distortion(0.5)
    assert s(0.5) == 0.0 and s.right(0.5) == 2.0


@settings(max_examples=150)
@given(distortions)
def test_tau_below_diagonal(s):
    """tau(u) <= u, since sigma is nondecreasing with unit mass."""
    assert np.all(s.tau(GRID) <= GRID + 1e-12)


@settings(max_examples=150)
@given(distortions)
def test_tau_inverse_galois(s):
    p = GRID
    assert np.all(s.tau(s.tau_inverse(p)) >= p - 1e-12)
    assert np.all(s.tau_inverse(s.tau(p)) <= p + 1e-12)


@settings(max_examples=150)
@given(distortions)
def test_measure_total_mass(s):
    assert measure_from_distortion(s).total_mass == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=150)
@given(distortions)
def test_measure_round_trip(s):
    back = distortion_from_measure(measure_from_distortion(s))
    u = GRID[1:-1]
    # compare right limits away from the step levels, where the two agree exactly
    far = np.all(np.abs(u[:, None] - s.levels[None, :]) > 1e-9, axis=1) if s.levels.size else True
    assert np.max(np.abs(back(u) - s(u))[far]) <= 1e-7


@settings(max_examples=100)
@given(distortions)
def test_norms(s):
    assert s.lq_norm(1) == 1.0
    assert 1.0 - 1e-12 <= s.lq_norm(2) <= s.lq_norm(np.inf) + 1e-12
