"""Finite-volume energy, gradient and Hessian for ``-eps Lap u = f(u)``, ``u_n = 0``.

With ``L`` the unscaled face Laplacian (``(Lu)_c = sum_{n ~ c} (u_c - u_n)``)
the discrete energy is

    E(u) = eps/2 * sum_faces (u_i - u_j)^2 - h^2 * sum_cells F(u_c)

whose exact gradient ``eps L u - h^2 f(u)`` is the cell-centred scheme for
the PDE.  Fields are 1-D float arrays indexed like the mask's active cells.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .domain import DomainMask
from .nonlinearity import NonlinearitySpec


@dataclass(frozen=True, eq=False)
class ProblemConfig:
    mask: DomainMask
    spec: NonlinearitySpec
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        object.__setattr__(self, "epsilon", float(self.epsilon))

    def with_epsilon(self, epsilon):
        return ProblemConfig(self.mask, self.spec, epsilon)


def check_field(mask, u):
    u = np.asarray(u, dtype=float)
    if u.shape != (mask.n_cells,):
        raise ValueError(f"field of shape {u.shape} does not match mask with {mask.n_cells} cells")
    return u


def laplacian_apply(mask, u):
    """Zero-flux face Laplacian (no ``1/h^2`` factor); symmetric PSD, kills constants."""
    u = check_field(mask, u)
    return _kernels.backend.laplacian(mask.neighbors, mask.faces, u)


def dirichlet_term(mask, u):
    """``sum_faces (u_i - u_j)^2``, the grid value of ``int |grad u|^2``."""
    u = check_field(mask, u)
    return _kernels.backend.dirichlet(mask.faces, u)


def energy(cfg, u):
    u = check_field(cfg.mask, u)
    return 0.5 * cfg.epsilon * dirichlet_term(cfg.mask, u) - cfg.mask.cell_area * float(np.sum(cfg.spec.F(u)))


def gradient(cfg, u):
    u = check_field(cfg.mask, u)
    return cfg.epsilon * laplacian_apply(cfg.mask, u) - cfg.mask.cell_area * cfg.spec.f(u)


def hessian_apply(cfg, u, v):
    u = check_field(cfg.mask, u)
    v = check_field(cfg.mask, v)
    return cfg.epsilon * laplacian_apply(cfg.mask, v) - cfg.mask.cell_area * cfg.spec.df(u) * v


def hessian_diagonal(cfg, u):
    u = check_field(cfg.mask, u)
    return cfg.epsilon * cfg.mask.degree - cfg.mask.cell_area * cfg.spec.df(u)


def integrate(mask, u, g=None):
    """``h^2 * sum_cells g(u_c)``; ``g=None`` integrates ``u`` itself."""
    u = check_field(mask, u)
    vals = u if g is None else np.broadcast_to(np.asarray(g(u), dtype=float), u.shape)
    return mask.cell_area * float(np.sum(vals))
