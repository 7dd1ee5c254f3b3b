"""Damped Newton for the discrete Euler-Lagrange system and seeded multistart."""

import logging
from dataclasses import dataclass, field
from itertools import cycle

import numpy as np

from .linalg import SymmetricOperator, cg_solve, minres_solve
from .nonlinearity import NoPositiveRootError, SaturationError, find_positive_root
from .spectral import neumann_eigenpairs, stability_index
from .variational import check_field, energy, gradient, laplacian_apply

log = logging.getLogger(__name__)

STRATEGIES = ("constants", "random", "spikes", "eigen-perturbed")


@dataclass
class SolveReport:
    field: np.ndarray = field(repr=False)
    residual_norm: float
    iterations: int
    energy: float
    classification: str
    constant_value: float
    stability_index: float
    positive: bool
    converged: bool
    message: str = ""

    @property
    def min_u(self):
        return float(np.min(self.field))

    @property
    def max_u(self):
        return float(np.max(self.field))


def classify(u):
    """``"constant"`` iff ``max u - min u <= 1e-6 * max(1, |mean u|)``."""
    u = np.asarray(u, dtype=float)
    spread = float(u.max() - u.min())
    return "constant" if spread <= 1e-6 * max(1.0, abs(float(u.mean()))) else "nonconstant"


def _norm(x):
    # 2-norm without overflow of the squares
    m = float(np.max(np.abs(x))) if x.size else 0.0
    return m * float(np.linalg.norm(x / m)) if 0.0 < m < np.inf else m


def scaled_residual(cfg, u, g=None):
    """``||grad E(u)||_2 / (h max(1, ||f(u)||_2))``; the convergence measure."""
    if g is None:
        g = gradient(cfg, u)
    return _norm(g) / (cfg.mask.h * max(1.0, _norm(cfg.spec.f(u))))


def jacobian(cfg, u):
    mask = cfg.mask
    eps = cfg.epsilon
    w = mask.cell_area * cfg.spec.df(u)
    return SymmetricOperator(lambda v: eps * laplacian_apply(mask, v) - w * v, mask.n_cells,
                             diagonal=eps * mask.degree - w,
                             norm_estimate=8.0 * eps + float(np.max(np.abs(w))))


def make_report(cfg, u, residual, iterations, converged, message="", with_stability=True):
    cls = classify(u)
    idx = float("nan")
    if with_stability and converged:
        try:
            idx = stability_index(cfg, u)
        except ArithmeticError as exc:
            message = (message + "; " if message else "") + f"stability: {exc}"
    try:
        e = energy(cfg, u)
    except SaturationError:
        e = float("nan")
    return SolveReport(
        field=u, residual_norm=residual, iterations=iterations, energy=e,
        classification=cls, constant_value=float(u.mean()) if cls == "constant" else float("nan"),
        stability_index=idx, positive=bool(u.min() > -1e-8), converged=converged, message=message)


def _newton_direction(J, g, lin_tol):
    # inexact directions are fine for Newton as long as they cut the linear residual
    d, info = cg_solve(J, -g, tol=lin_tol, maxit=5000)
    if not info.negative_curvature and info.residual < 0.5:
        return d, "cg"
    d, info = minres_solve(J, -g, tol=lin_tol, maxit=5000)
    if info.residual < 0.5:
        return d, "minres"
    return None, info.message


def _snap_to_constant(cfg, u, res):
    """Replace a near-constant field by the exact constant solution ``c``,
    ``f(c) = 0``, found by scalar Newton from its mean, if that lowers the
    residual.  At a degenerate zero (e.g. ``-t^3`` at 0) field Newton only
    converges linearly, and this removes the slow tail."""
    c = float(np.mean(u))
    f, df = cfg.spec.f, cfg.spec.df
    try:
        for _ in range(500):
            fc = float(f(c))
            if fc == 0.0:
                break
            slope = float(df(c))
            if slope == 0.0 or not np.isfinite(slope):
                break
            step = fc / slope
            if abs(step) > 1.0 + abs(c):
                return None
            c -= step
            if abs(step) <= 1e-17 * abs(c):
                break
        v = cfg.mask.constant(c)
        rv = scaled_residual(cfg, v)
    except (SaturationError, ArithmeticError):
        return None
    return (v, rv) if rv <= res else None


def newton_solve(cfg, initial, tol=1e-10, maxit=60, with_stability=True, blowup=1e6, stagnation=8):
    """Damped Newton from ``initial`` until the scaled residual is below ``tol``.

    Linear steps use Jacobi-preconditioned CG, MINRES when CG meets negative
    curvature or stalls, and a preconditioned residual-descent step when both
    fail.
    Steps are halved (at most 30 times) until ``||grad E||`` decreases.  A
    run stops early after ``stagnation`` consecutive steps that reduce
    ``||grad E||`` by less than 1%: it has settled in a local minimum of the
    residual that is not a solution.
    Iteration continues past ``tol`` while quadratic convergence lasts, to
    leave the discrete identities satisfied well below the tolerance.
    """
    u = np.array(check_field(cfg.mask, initial), dtype=float)
    target = tol * 1e-3
    try:
        g = gradient(cfg, u)
    except SaturationError as exc:
        return make_report(cfg, u, float("inf"), 0, False, f"initial field saturates: {exc}", False)
    res = scaled_residual(cfg, u, g)
    gnorm = _norm(g)
    it = 0
    slow = 0
    message = ""
    while res > target and it < maxit:
        J = jacobian(cfg, u)
        if not np.all(np.isfinite(J.diagonal)):
            message = "divergence: Jacobian overflow"
            break
        lin_tol = min(0.1, max(1e-12, res))
        d, _ = _newton_direction(J, g, lin_tol)
        directions = [d] if d is not None else []
        # residual descent: -M^{-1} J g decreases ||g||^2 for SPD M
        minv = 1.0 / np.maximum(np.abs(J.diagonal), 1e-300)
        directions.append(-minv * J(g))
        accepted = False
        for d in directions:
            s = 1.0
            for _ in range(31):
                trial = u + s * d
                try:
                    gt = gradient(cfg, trial)
                except SaturationError:
                    s *= 0.5
                    continue
                gtn = _norm(gt)
                if gtn <= (1.0 - 1e-4 * s) * gnorm:
                    accepted = True
                    break
                s *= 0.5
            if accepted:
                break
        it += 1
        if not accepted:
            message = f"line search stalled at residual {res:.3e}"
            break
        slow = slow + 1 if gtn > 0.99 * gnorm else 0
        u, g, gnorm = trial, gt, gtn
        res = scaled_residual(cfg, u, g)
        if slow >= stagnation and res > tol:
            message = f"stagnated at residual {res:.3e}"
            break
        if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > blowup:
            message = "divergence: field blew up"
            break
    else:
        if not np.isfinite(res):
            message = "divergence: residual overflow"
        elif res > target and res > tol:
            message = f"maxit={maxit} reached at residual {res:.3e}"
    if classify(u) == "constant":
        snapped = _snap_to_constant(cfg, u, res)
        if snapped is not None:
            u, res = snapped
    converged = bool(res <= tol)
    if converged:
        message = ""
    log.debug("newton: %d iterations, residual %.3e, %s", it, res, message or "converged")
    return make_report(cfg, u, res, it, converged, message, with_stability)


# ----------------------------------------------------------------- multistart

@dataclass
class MultistartResult:
    solutions: list
    runs: list

    @property
    def n_converged(self):
        return sum(r.converged for r in self.runs)

    @property
    def failures(self):
        return [r for r in self.runs if not r.converged]


def _positive_root(spec):
    try:
        return find_positive_root(spec)
    except NoPositiveRootError:
        return None


def initial_fields(cfg, strategy, n, seed, level_range=(0.0, 2.0), amplitude=0.5):
    """Generate ``n`` initial fields deterministically from ``seed``."""
    from .mountain_pass import build_tent, tent_centers

    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}")
    rng = np.random.default_rng(seed)
    mask = cfg.mask
    lo, hi = level_range
    out = []
    if strategy == "constants":
        for level in rng.uniform(lo, hi, n):
            out.append(mask.constant(level))
    elif strategy == "random":
        for _ in range(n):
            out.append(rng.uniform(lo, hi) + amplitude * rng.standard_normal(mask.n_cells))
    elif strategy == "spikes":
        root = _positive_root(cfg.spec)
        backgrounds = [0.0] if root is None else [0.0, root]
        eps = cfg.epsilon
        centers = tent_centers(mask, eps, n, rng)
        heights = cycle([1.0, 2.0, 4.0])
        for k, (c, x) in enumerate(zip(centers, heights)):
            tent = build_tent(mask, eps, center=c, clip=True)
            out.append(backgrounds[k % len(backgrounds)] + x * eps * tent)
    else:
        modes = neumann_eigenpairs(mask, k=min(4, mask.n_cells - 1))[1]
        root = _positive_root(cfg.spec)
        levels = [0.0] if root is None else [0.0, root]
        for k in range(n):
            coef = rng.standard_normal(modes.shape[1])
            pert = modes @ coef
            pert *= amplitude / max(np.max(np.abs(pert)), 1e-300)
            out.append(levels[k % len(levels)] + pert)
    return out


def deduplicate(reports, mask, rel=1e-5):
    """Keep one report per distinct field; ``u ~ v`` iff
    ``||u - v||_L2 <= rel (1 + ||u||_L2)`` (grid L^2 norm).  Sorted by
    ``(energy, ||u||)``."""
    keyed = sorted(reports, key=lambda r: (r.energy, mask.l2_norm(r.field)))
    distinct = []
    for r in keyed:
        if not any(mask.l2_norm(r.field - d.field) <= rel * (1.0 + mask.l2_norm(d.field)) for d in distinct):
            distinct.append(r)
    return distinct


def multistart(cfg, strategy="random", n=50, seed=0, tol=1e-10, maxit=60, level_range=(0.0, 2.0),
               amplitude=0.5, with_stability=True):
    """Newton from ``n`` seeded initial fields; returns distinct converged
    solutions (sorted by energy) together with every per-start report."""
    if n < 1:
        raise ValueError("n must be >= 1")
    inits = initial_fields(cfg, strategy, n, seed, level_range, amplitude)
    runs = [newton_solve(cfg, u0, tol=tol, maxit=maxit, with_stability=False) for u0 in inits]
    distinct = deduplicate([r for r in runs if r.converged], cfg.mask)
    if with_stability:
        for r in distinct:
            try:
                r.stability_index = stability_index(cfg, r.field)
            except ArithmeticError as exc:
                r.message = f"stability: {exc}"
    return MultistartResult(distinct, runs)
