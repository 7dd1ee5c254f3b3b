import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neumann_patterns.domain import build_mask
from neumann_patterns.mountain_pass import (CUBIC_COEFFICIENT, TentSupportError, build_tent, cubic_bound,
                                            cubic_bound_max, profile_and_bound, quadratic_coefficient, ray_profile,
                                            run_mountain_pass, tent_moments, tent_ray_energy)
from neumann_patterns.nonlinearity import SaturationError, exp_family, root_energy_density
from neumann_patterns.variational import ProblemConfig, dirichlet_term, energy, integrate


def closed_tail(x):
    return (math.expm1(x) - x - x ** 2 / 2 - x ** 3 / 6 - x ** 4 / 24) / x ** 2


@pytest.fixture(scope="module")
def disk64():
    return build_mask("disk", 1 / 64)


def test_tent_shape(disk64):
    eps = 0.04
    w = build_tent(disk64, eps)
    h = disk64.h
    assert np.max(w) == pytest.approx(1 / eps, rel=h / math.sqrt(eps))
    support = int(np.count_nonzero(w))
    assert support == pytest.approx(math.pi * eps / h ** 2, rel=0.05)
    xy = disk64.cell_centers()
    r = np.hypot(xy[:, 0], xy[:, 1])
    k = int(np.argmin(np.abs(r - math.sqrt(eps) / 2)))
    assert w[k] == pytest.approx((1 - r[k] / math.sqrt(eps)) / eps, rel=1e-12)


def test_tent_support_must_fit(disk64):
    with pytest.raises(TentSupportError):
        build_tent(disk64, 0.04, center=(0.9, 0.0))
    with pytest.raises(ValueError):
        build_tent(disk64, 0.0)
    clipped = build_tent(disk64, 0.04, center=(0.9, 0.0), clip=True)
    assert np.count_nonzero(clipped) > 0


def test_moment_closed_forms():
    assert tent_moments(1.0, 2)[0] == pytest.approx(math.pi / 6, rel=1e-15)
    assert tent_moments(0.1, 3)[0] == pytest.approx(10 * math.pi, rel=1e-13)
    assert tent_moments(0.5, 2)[1] == pytest.approx(4 * math.pi, rel=1e-15)
    with pytest.raises(ValueError):
        tent_moments(0.1, 0)


def test_moments_by_grid_quadrature(disk64):
    eps = 0.09
    w = build_tent(disk64, eps)
    for k in (2, 3, 4):
        assert integrate(disk64, w ** k) == pytest.approx(tent_moments(eps, k)[0], rel=0.02)
    assert dirichlet_term(disk64, w) == pytest.approx(tent_moments(eps, 2)[1], rel=0.03)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, 60.0))
def test_tail_series_matches_the_closed_form(x):
    # ray profile = A x^2 - 2 pi tail(x); recover tail and compare
    tail = (quadratic_coefficient(0.0) * x * x - ray_profile(0.0, x)) / (2 * math.pi)
    assert tail == pytest.approx(closed_tail(x), rel=1e-10)


def test_ray_energy_basics():
    assert tent_ray_energy(1.0, 0.05, 0.0) == 0.0
    eps = 0.05
    for t in (1e-4, 1e-5):
        assert tent_ray_energy(1.0, eps, t) / t ** 2 == pytest.approx(math.pi / (2 * eps) * (1 + 1 / 6), rel=1e-3)
    with pytest.raises(ValueError):
        tent_ray_energy(1.0, eps, -1.0)
    with pytest.raises(SaturationError):
        ray_profile(1.0, 800.0)
    # a fixed term count is honoured
    assert ray_profile(1.0, 3.0, terms=1) == pytest.approx(cubic_bound(1.0, 3.0), rel=1e-15)


def test_ray_energy_has_an_interior_maximum():
    eps = 0.05
    t = np.linspace(0, 40 * eps, 801)
    g = np.array([tent_ray_energy(1.0, eps, s) for s in t])
    k = int(np.argmax(g))
    assert 0 < k < len(t) - 1
    assert np.all(np.diff(g[: k + 1]) > 0) and np.all(np.diff(g[k:]) < 0)
    assert g[-1] < 0


def test_series_matches_grid_energy_of_scaled_tents():
    mask = build_mask("disk", 1 / 128)
    eps = 0.09
    cfg = ProblemConfig(mask, exp_family(1.0), eps)
    w = build_tent(mask, eps)
    for t in (eps, 2 * eps, 4 * eps):
        assert energy(cfg, t * w) == pytest.approx(tent_ray_energy(1.0, eps, t), rel=0.03)


@pytest.mark.parametrize("delta", [0.0, 0.5, 1.0, 2.0])
def test_profile_stays_below_the_cubic_bound(delta):
    x = np.linspace(0.0, 40.0, 4001)
    eta, hm = profile_and_bound(delta, x)
    assert np.all(eta <= hm + 1e-9 * np.maximum(1.0, np.abs(hm)))
    argmax, bmax = cubic_bound_max(delta)
    assert np.max(eta) <= bmax
    assert cubic_bound(delta, argmax) == pytest.approx(bmax, rel=1e-13)
    assert np.max(hm) <= bmax * (1 + 1e-12)


def test_bound_maximum_at_zero_delta():
    argmax, bmax = cubic_bound_max(0.0)
    assert argmax == pytest.approx(20.0, rel=1e-14)
    assert bmax == pytest.approx(200 * math.pi / 3, rel=1e-10)
    A = quadratic_coefficient(1.0)
    assert cubic_bound_max(1.0)[1] == pytest.approx(6400 * A ** 3 / (3 * CUBIC_COEFFICIENT ** 2), rel=1e-15)


def test_mountain_pass_small_disk():
    mask = build_mask("disk", 1 / 32)
    cfg = ProblemConfig(mask, exp_family(1.0), 0.05)
    run = run_mountain_pass(cfg, seed=1)
    rep = run.report
    assert run.descent_converged and rep.converged
    assert rep.classification == "nonconstant"
    assert 0 < rep.energy < min(cubic_bound_max(1.0)[1] * cfg.epsilon, root_energy_density(1.0) * mask.area())
    assert rep.min_u > -1e-8
    assert rep.stability_index < 0
    maxima = [row.max_energy for row in run.trace]
    assert np.all(np.diff(maxima) <= 0)
    path = run.path
    assert path.energies[0] == 0.0 and path.energies[-1] < 0
    assert path.max_energy == pytest.approx(maxima[-1])


def test_mountain_pass_is_seeded():
    mask = build_mask("disk", 1 / 16)
    cfg = ProblemConfig(mask, exp_family(1.0), 0.1)
    a = run_mountain_pass(cfg, seed=4, center="random")
    b = run_mountain_pass(cfg, seed=4, center="random")
    assert np.array_equal(a.report.field, b.report.field)
    assert [r.max_energy for r in a.trace] == [r.max_energy for r in b.trace]
