import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distorted_premiums import (
    DiscreteLoss,
    EmpiricalLoss,
    Exponential,
    LogNormal,
    Normal,
    Truncated,
    Uniform,
    distorted_cdf,
    distorted_density,
    distorted_quantile,
    loss_from_spec,
    make_cte_distortion,
    make_poly_distortion,
)
from distorted_premiums.errors import DistortionError, NoDensityError, UnboundedError
from distorted_premiums.quadrature import integrate, unit_breaks

from strategies import discrete_losses, distortions

U = (np.arange(200) + 0.5) / 200
FIG1 = make_poly_distortion([0.7, 0.0, 0.9])


def test_two_point_quantiles(two_point):
    assert two_point.quantile(0.95) == 100.0
    assert two_point.quantile(0.9) == 0.0
    assert two_point.quantile(1.0) == 100.0


def test_uniform_quantile():
    assert Uniform(0, 1).quantile(0.3) == pytest.approx(0.3)


def test_quantile_domain(two_point):
    with pytest.raises(ValueError):
        two_point.quantile(0.0)
    with pytest.raises(UnboundedError):
        Exponential(1.0).quantile(1.0)


def test_discrete_validation():
    with pytest.raises(DistortionError):
        DiscreteLoss([1.0, 2.0], [0.5, 0.6])
    with pytest.raises(DistortionError):
        DiscreteLoss([1.0, 2.0], [1.0, 0.0])
    merged = DiscreteLoss([2.0, 1.0, 2.0], [0.25, 0.5, 0.25])
    assert merged.values.tolist() == [1.0, 2.0] and merged.probs.tolist() == [0.5, 0.5]


def test_empirical_is_right_continuous():
    e = EmpiricalLoss([3.0, 1.0, 2.0, 2.0])
    assert e.cdf(2.0) == 0.75 and e.cdf(1.999) == 0.25
    assert e.quantile(0.25) == 1.0 and e.quantile(0.26) == 2.0


def test_distorted_cdf_examples(two_point):
    y = np.linspace(-3, 3, 7)
    assert np.allclose(distorted_cdf(make_cte_distortion(0.0), Normal(), y), Normal().cdf(y))
    assert distorted_cdf(make_cte_distortion(0.5), two_point, 0.0) == pytest.approx(0.8)
    assert distorted_cdf(FIG1, Normal(), 0.0) == pytest.approx(0.3875, abs=1e-15)


def test_distorted_quantile_examples(two_point):
    loss = Normal(1.0, 2.0)
    assert np.allclose(distorted_quantile(make_cte_distortion(0.0), loss, U), loss.quantile(U))
    assert distorted_quantile(make_cte_distortion(0.5), Uniform(), 0.5) == pytest.approx(0.75)
    assert distorted_quantile(make_cte_distortion(0.9), two_point, 0.5) == 100.0


def test_distorted_density_examples():
    n = Normal()
    assert distorted_density(make_cte_distortion(0.0), n, 0.0) == pytest.approx(0.39894, abs=1e-5)
    assert distorted_density(FIG1, n, 0.0) == pytest.approx(0.36902, abs=1e-5)
    assert distorted_density(make_cte_distortion(0.5), n, -1.0) == 0.0


def test_no_density_for_discrete(two_point):
    with pytest.raises(NoDensityError):
        distorted_density(FIG1, two_point, 0.0)


def test_distorted_density_integrates_to_one():
    loss = Truncated(Normal(), -8, 8)
    mass = integrate(lambda y: distorted_density(FIG1, loss, y), np.linspace(-8, 8, 17))
    assert mass == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("loss", [Normal(0.5, 2.0), LogNormal(0.0, 0.5), Exponential(2.0),
                                  Uniform(-1.0, 3.0), Truncated(Normal(), -1.0, 2.0)],
                         ids=repr)
def test_closed_form_tail_integral(loss):
    """Closed-form tail integrals agree with quadrature of the quantile."""
    for a in (0.0, 0.3, 0.9, 0.999):
        num = integrate(lambda u: loss._quantile(u), unit_breaks(a)[unit_breaks(a) >= a])
        assert float(loss.tail_integral(a)) == pytest.approx(num, rel=1e-7, abs=1e-9)


@pytest.mark.parametrize("loss", [Normal(0.5, 2.0), Exponential(2.0), Truncated(Normal(), -3, 3)],
                         ids=repr)
def test_quantile_inverts_cdf(loss):
    assert np.allclose(loss.cdf(loss.quantile(U)), U, atol=1e-12)


def test_loss_specs(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("1\n2\n3\n")
    assert loss_from_spec({"kind": "empirical", "path": "s.csv"}, tmp_path).mean == 2.0
    assert loss_from_spec({"kind": "discrete", "values": [0, 100], "probs": [0.9, 0.1]}).mean \
        == pytest.approx(10.0)
    assert loss_from_spec({"kind": "uniform", "a": 0, "b": 1}).mean == 0.5
    with pytest.raises(DistortionError):
        loss_from_spec({"kind": "pareto"})


def test_sampling_is_seeded():
    a = Normal().sample(5, np.random.default_rng(3))
    b = Normal().sample(5, np.random.default_rng(3))
    assert np.array_equal(a, b)


@settings(max_examples=200)
@given(distortions, discrete_losses())
def test_first_order_dominance(s, loss):
    """The distorted loss is larger in distribution."""
    assert np.all(distorted_quantile(s, loss, U) >= loss.quantile(U))
    y = np.linspace(loss.essinf - 1, loss.esssup + 1, 200)
    assert np.all(distorted_cdf(s, loss, y) <= loss.cdf(y) + 1e-12)


@settings(max_examples=100)
@given(distortions, discrete_losses())
def test_discrete_distorted_cdf_is_exact(s, loss):
    assert np.array_equal(distorted_cdf(s, loss, loss.values), s.tau(loss.cum))


@settings(max_examples=100)
@given(distortions, st.sampled_from([Uniform(), Truncated(Normal(), -3, 3), Exponential(1.0)]))
def test_dominance_continuous(s, loss):
    assert np.all(distorted_quantile(s, loss, U) >= loss.quantile(U) - 1e-12)
