"""Finite-volume laboratory for ``-eps Lap u = f(u)`` with zero-flux boundaries.

Constant-only (rigidity) checks, spike patterns by a numerical mountain pass,
Newton multistart, Neumann spectra and the closed-form constants of the
exponential nonlinearity ``e^t - 1 - (1 + delta) t``.
"""

from ._kernels import use_backend
from .analysis import (AnalyticConstants, RigidityReport, SweepRow, analytic_constants, divergence_defect,
                       epsilon_sweep, rigidity_check)
from .domain import DomainMask, MaskError, area, build_mask, parse_shape
from .linalg import EigenError, SymmetricOperator, cg_solve, dense_jacobi_eigh, minres_solve, smallest_eigenpairs
from .mountain_pass import (TentSupportError, build_tent, cubic_bound, cubic_bound_max, ray_profile,
                            run_mountain_pass, tent_moments, tent_ray_energy)
from .newton import MultistartResult, SolveReport, classify, multistart, newton_solve
from .nonlinearity import (NoPositiveRootError, NonlinearitySpec, SaturationError, check_factorization,
                           check_monotone_sign, check_single_sign, cubic, exp_family, find_positive_root, linear,
                           parse_nonlinearity, polynomial, power, root_energy_density, root_energy_identity)
from .spectral import SpectralReport, neumann_eigenpairs, neumann_lambda2, stability_index
from .variational import (ProblemConfig, dirichlet_term, energy, gradient, hessian_apply, integrate,
                          laplacian_apply)

__version__ = "0.1.0"
