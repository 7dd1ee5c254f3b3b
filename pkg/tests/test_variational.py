import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import lattice_laplacian

from neumann_patterns.domain import build_mask
from neumann_patterns.nonlinearity import cubic, exp_family, power
from neumann_patterns.variational import (ProblemConfig, dirichlet_term, energy, gradient, hessian_apply,
                                          hessian_diagonal, integrate, laplacian_apply)


def test_constants_are_in_the_kernel_exactly(lshape16):
    assert np.all(laplacian_apply(lshape16, np.full(lshape16.n_cells, 3.7)) == 0.0)


def test_divergence_theorem(lshape16, rng):
    u = rng.standard_normal(lshape16.n_cells)
    assert abs(laplacian_apply(lshape16, u).sum()) <= 1e-12 * np.abs(u).sum()


def test_laplacian_matches_dense_assembly(lshape16, rng):
    u = rng.standard_normal(lshape16.n_cells)
    L = lattice_laplacian(lshape16)
    assert np.allclose(laplacian_apply(lshape16, u), L @ u, atol=1e-12)
    assert np.allclose(L, L.T)
    assert np.linalg.eigvalsh(L).min() > -1e-12
    assert dirichlet_term(lshape16, u) == pytest.approx(u @ L @ u, rel=1e-12)


def test_integrate(square32):
    assert integrate(square32, square32.constant(0.0), lambda u: 1.0) == pytest.approx(1.0)
    assert integrate(square32, square32.constant(2.5)) == pytest.approx(2.5)


def test_field_shape_is_checked(square32):
    with pytest.raises(ValueError):
        laplacian_apply(square32, np.zeros(3))
    with pytest.raises(ValueError):
        ProblemConfig(square32, cubic(), 0.0)


SPECS = [exp_family(1.0), power(3), cubic()]


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([8, 32]), st.sampled_from(SPECS), st.integers(0, 2**32 - 1))
def test_gradient_matches_central_differences(n, spec, seed):
    rng = np.random.default_rng(seed)
    mask = build_mask("rectangle", 1 / n)
    cfg = ProblemConfig(mask, spec, 0.05)
    u = 0.5 + 0.3 * rng.standard_normal(mask.n_cells)
    g = gradient(cfg, u)
    v = rng.standard_normal(mask.n_cells)
    s = 1e-5
    fd = (energy(cfg, u + s * v) - energy(cfg, u - s * v)) / (2 * s)
    assert fd == pytest.approx(g @ v, rel=1e-6, abs=1e-10 * np.abs(g).sum())


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(SPECS), st.integers(0, 2**32 - 1))
def test_hessian_matches_gradient_differences(spec, seed):
    rng = np.random.default_rng(seed)
    mask = build_mask("lshape", 1 / 16)
    cfg = ProblemConfig(mask, spec, 0.05)
    u = 0.5 + 0.3 * rng.standard_normal(mask.n_cells)
    v = rng.standard_normal(mask.n_cells)
    s = 1e-6
    fd = (gradient(cfg, u + s * v) - gradient(cfg, u - s * v)) / (2 * s)
    hv = hessian_apply(cfg, u, v)
    assert np.linalg.norm(fd - hv) <= 1e-5 * np.linalg.norm(hv)
    w = rng.standard_normal(mask.n_cells)
    assert w @ hessian_apply(cfg, u, v) == pytest.approx(v @ hessian_apply(cfg, u, w), rel=1e-12)
    e = np.zeros(mask.n_cells)
    e[5] = 1.0
    assert hessian_diagonal(cfg, u)[5] == pytest.approx(hessian_apply(cfg, u, e)[5])


def test_rigidity_identity_pairing(lshape16, rng):
    # <g, u - r> = eps * dirichlet - h^2 sum f(u)(u - r) for any field
    cfg = ProblemConfig(lshape16, exp_family(1.0), 0.05)
    u = rng.standard_normal(lshape16.n_cells)
    r = 1.25
    lhs = gradient(cfg, u) @ (u - r)
    rhs = cfg.epsilon * dirichlet_term(lshape16, u) - lshape16.cell_area * np.sum(cfg.spec.f(u) * (u - r))
    assert lhs == pytest.approx(rhs, rel=1e-12)
