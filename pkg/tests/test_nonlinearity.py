import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bisect

from neumann_patterns.nonlinearity import (NoPositiveRootError, SaturationError, check_factorization,
                                           check_monotone_sign, check_single_sign, cubic, exp_family,
                                           find_positive_root, linear, parse_nonlinearity, polynomial, power,
                                           root_energy_density, root_energy_identity)

FAMILIES = [exp_family(1.0), exp_family(0.0), exp_family(-0.5), power(3), power(2.5), cubic(), linear(-1.0),
            polynomial([0.0, 1.0, 0.0, -1.0])]


def test_exp_family_values():
    s = exp_family(1.0)
    assert s.evaluate(0.0) == (0.0, -1.0, 0.0)
    f, df, F = s.evaluate(1.0)
    assert f == pytest.approx(math.e - 3, abs=1e-14)
    assert df == pytest.approx(math.e - 2, abs=1e-14)
    assert F == pytest.approx(math.e - 3, abs=1e-14)


def test_cubic_values():
    assert tuple(map(float, cubic().evaluate(2.0))) == (-8.0, -12.0, -4.0)


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: s.label)
def test_antiderivative_vanishes_at_zero(spec):
    assert spec.F(0.0) == 0.0


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(FAMILIES), st.floats(0.05, 3.0))
def test_antiderivative_consistency(spec, t):
    s = 1e-4
    central = (spec.F(t + s) - spec.F(t - s)) / (2 * s)
    assert central == pytest.approx(spec.f(t), rel=1e-6, abs=1e-7)
    dcentral = (spec.f(t + s) - spec.f(t - s)) / (2 * s)
    assert dcentral == pytest.approx(spec.df(t), rel=1e-6, abs=1e-7)


def test_saturation_is_an_error():
    with pytest.raises(SaturationError):
        exp_family(1.0).f(701.0)
    with pytest.raises(ValueError):
        power(2.5).f(-1.0)


def test_positive_root_against_bisection_oracle():
    xi = find_positive_root(exp_family(1.0))
    oracle = bisect(lambda t: math.expm1(t) - 2 * t, 1e-6, 10.0)
    assert xi == pytest.approx(oracle, abs=1e-12)
    assert xi == pytest.approx(1.25643, abs=1e-4)
    assert abs(exp_family(1.0).f(xi)) <= 1e-12 * max(1, math.exp(xi))
    assert find_positive_root(power(3)) == 1.0


def test_small_delta_root_is_twice_delta():
    assert find_positive_root(exp_family(1e-3)) == pytest.approx(2e-3, rel=2e-3)


@pytest.mark.parametrize("delta", [0.0, -0.5])
def test_no_positive_root(delta):
    with pytest.raises(NoPositiveRootError):
        find_positive_root(exp_family(delta))


def test_root_energy_density():
    K = root_energy_density(1.0)
    xi = bisect(lambda t: math.expm1(t) - 2 * t, 1e-6, 10.0)
    assert K == pytest.approx(xi * xi - (math.expm1(xi) - xi), abs=1e-12)
    assert K == pytest.approx(float(root_energy_identity(xi)), abs=1e-12)
    assert K == pytest.approx(0.32213, abs=1e-4)
    assert root_energy_density(1e-6) < 1e-15


@pytest.mark.parametrize("delta", np.linspace(0.15, 3.0, 20))
def test_root_energy_density_positive(delta):
    assert root_energy_density(delta) > 0


def test_root_energy_identity_is_flat_at_zero():
    x = np.array([1e-3, 1e-2])
    assert np.all(root_energy_identity(x) > 0)
    # vanishes to third order: h(x) ~ x^3 / 12
    assert root_energy_identity(1e-2) / 1e-6 == pytest.approx(1 / 12, rel=1e-2)


def test_exp_family_has_at_most_two_roots():
    for delta in (-0.5, 0.5, 1.0, 2.0):
        t = np.linspace(-10, 10, 20001)
        v = exp_family(delta).f(t)
        changes = np.count_nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0) + np.count_nonzero(v == 0)
        assert changes <= 2


def test_monotone_sign_condition():
    assert check_monotone_sign(cubic(), 0.0).holds
    assert check_monotone_sign(linear(-1.0), 0.0).holds
    rep = check_monotone_sign(exp_family(1.0), 0.0, (-10, 10), 10_000)
    assert not rep.holds and rep.worst_t > 9


def test_single_sign_condition():
    rep = check_single_sign(exp_family(0.0), (-20, 20))
    assert rep.holds and rep.sign == 1
    assert not check_single_sign(exp_family(1.0)).holds
    assert not check_single_sign(linear(1.0)).holds


def test_below_one_the_exp_family_is_only_nonnegative_for_positive_t():
    # a = 1 + delta < 1 gives a negative root, so f changes sign on the negative axis
    assert not check_single_sign(exp_family(-0.5), (-20, 20)).holds
    assert check_single_sign(exp_family(-0.5), (0, 20)).holds


def test_factorization():
    # f = (1 + t^2) * (1 - t): positive weight, decreasing profile, root 1
    rep = check_factorization(lambda t: 1 + t * t, lambda t: 1 - t)
    assert rep.factor_positive and rep.profile_nonincreasing and rep.condition_holds
    assert rep.roots == pytest.approx((1.0,), abs=1e-9)
    spec = polynomial([1.0, -1.0, 1.0, -1.0])  # the same product expanded
    assert check_monotone_sign(spec, 1.0).holds


def test_parse_nonlinearity():
    assert parse_nonlinearity("exp:delta=1") == exp_family(1.0)
    assert parse_nonlinearity("power:p=3") == power(3)
    assert parse_nonlinearity("cubic") == cubic()
    assert parse_nonlinearity("polynomial:coeffs=0/1/0/-1").f(2.0) == pytest.approx(-6.0)
    for bad in ("sine", "exp:beta=1", "polynomial", "exp:delta"):
        with pytest.raises(ValueError):
            parse_nonlinearity(bad)
