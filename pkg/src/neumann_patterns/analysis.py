"""Diagnostics on solutions: rigidity identity, divergence identity, closed-form
constants of the exponential family and an exploratory epsilon sweep."""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .mountain_pass import CUBIC_COEFFICIENT, TentSupportError, cubic_bound_max, quadratic_coefficient, \
    run_mountain_pass
from .newton import deduplicate, multistart
from .nonlinearity import NoPositiveRootError, exp_family, find_positive_root, root_energy_density
from .spectral import SpectralReport, neumann_lambda2, stability_index  # noqa: F401  (re-exported)
from .variational import check_field, dirichlet_term

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RigidityReport:
    dirichlet_term: float
    pairing_term: float
    gap: float


def rigidity_check(cfg, u, root):
    """Both sides of ``sum_faces (u_i - u_j)^2 = (h^2/eps) sum f(u)(u - root)``.

    The identity holds at any discrete solution (pair the equation with
    ``u - root`` and sum by parts).  When ``f(t)(t - root) <= 0`` on the range
    of ``u`` the right side is <= 0, so both vanish and ``u`` is constant.
    """
    mask = cfg.mask
    u = check_field(mask, u)
    d = dirichlet_term(mask, u)
    p = mask.cell_area / cfg.epsilon * float(np.sum(cfg.spec.f(u) * (u - root)))
    return RigidityReport(d, p, d - p)


def divergence_defect(cfg, u):
    """``(|h^2 sum f(u)|, h^2 sum |f(u)|)``.

    Summing the discrete equation over all cells kills the Laplacian, so the
    first number is zero at an exact solution; the second is its natural scale.
    """
    u = check_field(cfg.mask, u)
    fu = cfg.spec.f(u)
    a = cfg.mask.cell_area
    return abs(a * float(np.sum(fu))), a * float(np.sum(np.abs(fu)))


@dataclass(frozen=True)
class AnalyticConstants:
    delta: float
    positive_root: float
    root_energy_density: float
    root_slope: float
    quadratic_coeff: float
    cubic_coeff: float
    bound_argmax: float
    bound_max: float
    lambda2: float = math.nan
    epsilon_threshold: float = math.nan


def analytic_constants(delta, mask=None):
    """Closed-form constants of the exponential family ``e^t - 1 - (1 + delta) t``.

    Root quantities are ``nan`` for ``delta <= 0`` where no positive root
    exists.  With a mask, ``epsilon_threshold = f'(root) / lambda2(mask)``: the
    diffusion at which the constant root state first loses stability to the
    lowest Neumann mode.  It is an onset heuristic, not a sharp threshold.
    """
    if delta < 0:
        raise ValueError("delta must be >= 0")
    spec = exp_family(delta)
    try:
        root = find_positive_root(spec)
        density = root_energy_density(delta)
        slope = float(spec.df(root))
    except NoPositiveRootError:
        root = density = slope = math.nan
    argmax, bmax = cubic_bound_max(delta)
    lam2 = threshold = math.nan
    if mask is not None:
        lam2 = neumann_lambda2(mask).lambda2
        threshold = slope / lam2
    return AnalyticConstants(float(delta), root, density, slope, quadratic_coefficient(delta),
                             CUBIC_COEFFICIENT, argmax, bmax, lam2, threshold)


@dataclass
class SweepRow:
    epsilon: float
    c_epsilon: float
    distinct_count: int
    has_nonconstant: bool
    threshold_ratio: float
    note: str = ""


def epsilon_sweep(cfg, epsilons, multistart_n=20, seed=0, tol=1e-10, strategy="spikes"):
    """Per epsilon: mountain-pass energy, multistart census and ``eps lambda2 / f'(root)``.

    Exploratory.  A row without nonconstant solutions means none were found in
    the starts tried, not that none exist.  Failures are recorded in ``note``
    and the sweep moves on.
    """
    epsilons = [float(e) for e in epsilons]
    if not epsilons:
        raise ValueError("epsilon list is empty")
    lam2 = neumann_lambda2(cfg.mask).lambda2
    try:
        slope = float(cfg.spec.df(find_positive_root(cfg.spec)))
    except NoPositiveRootError:
        slope = math.nan
    rows = []
    for eps in epsilons:
        c = cfg.with_epsilon(eps)
        notes = []
        found = []
        c_eps = math.nan
        try:
            run = run_mountain_pass(c, tol=tol, seed=seed)
            if run.report.converged:
                found.append(run.report)
                if run.report.classification == "nonconstant":
                    c_eps = run.report.energy
            else:
                notes.append(f"mountain pass: {run.report.message}")
        except (TentSupportError, ArithmeticError) as exc:
            notes.append(f"mountain pass: {exc}")
        ms = multistart(c, strategy, multistart_n, seed, tol=tol, with_stability=False)
        if ms.failures:
            notes.append(f"{len(ms.failures)}/{multistart_n} starts did not converge")
        distinct = deduplicate(found + ms.solutions, c.mask)
        nonconstant = any(r.classification == "nonconstant" for r in distinct)
        if not nonconstant:
            notes.append(f"no nonconstant solution found in {multistart_n} starts")
        row = SweepRow(eps, c_eps, len(distinct), nonconstant, eps * lam2 / slope, "; ".join(notes))
        log.info("sweep eps=%g: %s", eps, row)
        rows.append(row)
    return rows
