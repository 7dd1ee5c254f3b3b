"""Neumann spectrum of a mask and stability of solutions."""

from dataclasses import dataclass

import numpy as np

from .linalg import SymmetricOperator, smallest_eigenpairs
from .variational import check_field, laplacian_apply


@dataclass
class SpectralReport:
    lambda1: float
    lambda2: float
    eigenvector2: np.ndarray


def laplacian_operator(mask, scaled=True):
    """``L / h^2`` (or ``L`` with ``scaled=False``) as a symmetric operator."""
    s = 1.0 / mask.cell_area if scaled else 1.0
    return SymmetricOperator(lambda v: s * laplacian_apply(mask, v), mask.n_cells,
                             diagonal=s * mask.degree, norm_estimate=8.0 * s)


def linearized_operator(cfg, u, scaled=True):
    """``(eps L - h^2 diag f'(u)) / h^2``, the second variation per unit area."""
    mask = cfg.mask
    u = check_field(mask, u)
    s = 1.0 / mask.cell_area if scaled else 1.0
    fp = mask.cell_area * cfg.spec.df(u)
    eps = cfg.epsilon
    return SymmetricOperator(lambda v: s * (eps * laplacian_apply(mask, v) - fp * v), mask.n_cells,
                             diagonal=s * (eps * mask.degree - fp),
                             norm_estimate=s * (8.0 * eps + float(np.max(np.abs(fp)))))


def neumann_lambda2(mask, tol=1e-10):
    """First two eigenvalues of ``L / h^2``; the constant mode is deflated
    explicitly, so ``lambda1`` is exactly 0."""
    ones = np.ones(mask.n_cells)
    vals, vecs = smallest_eigenpairs(laplacian_operator(mask), k=1, tol=tol, deflate=ones)
    return SpectralReport(0.0, float(vals[0]), vecs[:, 0])


def neumann_eigenpairs(mask, k, tol=1e-10):
    """The ``k`` lowest non-constant Neumann modes of ``L / h^2``."""
    return smallest_eigenpairs(laplacian_operator(mask), k=k, tol=tol, deflate=np.ones(mask.n_cells))


def stability_index(cfg, u, tol=1e-10):
    """Smallest eigenvalue of the linearisation at ``u``; ``u`` is stable iff >= 0.

    For an exactly constant field the operator is ``eps L / h^2 - f'(c)``
    whose bottom eigenvalue is ``-f'(c)`` (constant eigenvector), returned
    without iteration.
    """
    u = check_field(cfg.mask, u)
    if u.size and np.all(u == u[0]):
        return float(-cfg.spec.df(u[0]))
    vals, _ = smallest_eigenpairs(linearized_operator(cfg, u), k=1, tol=tol)
    return float(vals[0])
