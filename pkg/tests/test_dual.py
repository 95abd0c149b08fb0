import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distorted_premiums import (
    DiscreteLoss,
    DualVariable,
    cte,
    cte_dual_forms,
    is_feasible,
    make_cte_distortion,
    make_poly_distortion,
    nonnegativity_check,
    premium_direct,
    sup_oracle,
)
from distorted_premiums.dual import comonotone_candidate, comonotone_value, dual_from_distortion
from distorted_premiums.errors import UnsupportedError
from distorted_premiums.losses import Uniform

from strategies import discrete_losses, distortions

FIG1 = make_poly_distortion([0.7, 0.0, 0.9])


def _uniform_z(values):
    values = np.asarray(values, float)
    return DualVariable(values, np.full(values.size, 1.0 / values.size))


@pytest.mark.parametrize("sigma", [make_cte_distortion(0.0), make_cte_distortion(0.7), FIG1],
                         ids=repr)
def test_constant_one_feasible(sigma):
    assert is_feasible(_uniform_z(np.ones(5)), sigma)


@pytest.mark.parametrize("sigma", [make_cte_distortion(0.8), FIG1], ids=repr)
def test_sigma_of_uniform_feasible_and_binding(sigma):
    z = dual_from_distortion(sigma, 200)
    res = is_feasible(z, sigma)
    assert res and z.values.min() >= 0
    assert len(res.binding) >= z.values.size  # binds at every node


def test_atom_above_cte_cap_infeasible():
    # sigma_0.5 caps Z at 2; an atom of size 3 with mass 0.25 breaks G <= S
    z = _uniform_z([3.0, 1.0, 0.0, 0.0])
    res = is_feasible(z, make_cte_distortion(0.5))
    assert not res and res.worst_excess > 0


def test_mean_defect_infeasible():
    assert not is_feasible(_uniform_z([1.0, 2.0]), FIG1)


def test_nonnegativity_examples():
    assert nonnegativity_check(_uniform_z(np.ones(4)), FIG1)
    assert nonnegativity_check(dual_from_distortion(make_cte_distortion(0.8), 50),
                               make_cte_distortion(0.8))
    neg = _uniform_z([-0.5, 1.0, 1.0, 2.5])
    assert neg.mean == pytest.approx(1.0)
    assert not is_feasible(neg, FIG1)


def test_oracle_identity(two_point):
    res = sup_oracle(make_cte_distortion(0.0), two_point, trials=500)
    assert res.candidate == pytest.approx(10.0)
    assert np.allclose(comonotone_candidate(make_cte_distortion(0.0), two_point).values, 1.0)


def test_oracle_two_point(two_point):
    res = sup_oracle(make_cte_distortion(0.8), two_point, trials=10_000, seed=1)
    assert res.candidate == pytest.approx(50.0, abs=1e-12)
    assert res.best <= res.candidate + 1e-9 and not res.improved


def test_oracle_ten_atoms():
    rng = np.random.default_rng(7)
    loss = DiscreteLoss(rng.normal(0, 10, 10), np.full(10, 0.1))
    res = sup_oracle(FIG1, loss, trials=10_000, seed=3)
    assert abs(res.candidate - premium_direct(FIG1, loss)) <= 1e-9
    assert res.best <= res.candidate + 1e-9
    assert res.accepted > 0


def test_oracle_is_seeded(two_point):
    a = sup_oracle(FIG1, two_point, trials=1000, seed=5)
    b = sup_oracle(FIG1, two_point, trials=1000, seed=5)
    assert a.best == b.best and a.accepted == b.accepted


def test_oracle_needs_discrete():
    with pytest.raises(UnsupportedError):
        sup_oracle(FIG1, Uniform(), trials=10)


def test_cte_dual_examples(two_point):
    assert cte_dual_forms(0.0, two_point) == pytest.approx((10.0, 10.0))
    assert cte_dual_forms(0.8, two_point) == pytest.approx((50.0, 50.0))
    assert cte_dual_forms(0.5, DiscreteLoss([1.0, 3.0], [0.5, 0.5])) == pytest.approx((3.0, 3.0))


@st.composite
def feasible_pair(draw):
    """A distortion, a loss, and two feasible duals on the loss atoms."""
    s = draw(distortions)
    loss = draw(discrete_losses())
    star = comonotone_candidate(s, loss).values
    n = star.size
    perm = np.array(draw(st.permutations(range(n))))
    lam = draw(st.floats(0.0, 1.0))
    # any rearrangement of Z* that keeps the mass vector is feasible only for
    # equal probabilities, so mix with the constant 1 which is always feasible
    z1 = DualVariable(lam * star + (1 - lam), loss.probs)
    equal = np.allclose(loss.probs, loss.probs[0])
    z2 = DualVariable(star[perm] if equal else np.ones(n), loss.probs)
    return s, loss, z1, z2


@settings(max_examples=150)
@given(feasible_pair(), st.floats(0.0, 1.0))
def test_convex_closure(data, lam):
    s, loss, z1, z2 = data
    assert is_feasible(z1, s) and is_feasible(z2, s)
    mix = DualVariable(lam * z1.values + (1 - lam) * z2.values, loss.probs)
    assert is_feasible(mix, s)


@settings(max_examples=150)
@given(feasible_pair())
def test_weak_duality(data):
    s, loss, z1, z2 = data
    prem = premium_direct(s, loss)
    for z in (z1, z2):
        assert z.pair(loss) <= prem + 1e-9


@settings(max_examples=150)
@given(feasible_pair())
def test_hardy_littlewood(data):
    s, loss, _, z2 = data
    assert z2.pair(loss) <= comonotone_value(loss, z2) + 1e-9


@settings(max_examples=150)
@given(distortions, discrete_losses())
def test_strong_duality(s, loss):
    star = comonotone_candidate(s, loss)
    assert is_feasible(star, s)
    assert abs(star.pair(loss) - premium_direct(s, loss)) <= 1e-9 * max(1, abs(star.pair(loss)))


@settings(max_examples=100)
@given(st.floats(0.0, 0.99), discrete_losses())
def test_cte_dual_forms_match(alpha, loss):
    g, c = cte_dual_forms(alpha, loss)
    ref = cte(alpha, loss)
    assert abs(g - ref) <= 1e-9 * max(1, abs(ref))
    assert abs(c - ref) <= 1e-9 * max(1, abs(ref))
