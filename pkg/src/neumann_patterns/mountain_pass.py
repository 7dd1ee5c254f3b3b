"""Tent test functions, their closed-form energies, and a numerical mountain pass.

The tent of parameter ``eps`` is the cone ``(1/eps)(1 - |x| / sqrt(eps))``
supported on the disk of radius ``sqrt(eps)``.  Along the ray ``t * tent``
the exponential-family energy has the closed form

    eps * [A x^2 - 2 pi S(x)],   x = t / eps,  A = (pi/2)(1 + delta/6),
    S(x) = sum_{k>=3} x^k / (k+2)!

which is bounded above by ``eps * (A x^2 - 2 pi x^3 / 5!)``.

The path algorithm deforms the straight path ``{t * w}`` from 0 to a
negative-energy point: every path is a ray, discretised by vertices
``t_i * v``; the maximal vertex is moved by a backtracking step along the
energy-norm gradient and the new ray is re-maximised, so the path maximum
decreases monotonically to a saddle.  Newton then polishes the saddle.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .linalg import SymmetricOperator, cg_solve
from .newton import make_report, newton_solve, scaled_residual
from .nonlinearity import SATURATION, SaturationError
from .variational import dirichlet_term, gradient, laplacian_apply

log = logging.getLogger(__name__)


class TentSupportError(ValueError):
    pass


# ------------------------------------------------------------------- tents

def build_tent(mask, eps, center=None, clip=False):
    """Sample the tent of parameter ``eps`` at the cell centres.

    Unless ``clip`` is set, every lattice cell within ``sqrt(eps)`` of the
    centre must be active (the support must lie inside the domain).
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    cx, cy = mask.interior_point if center is None else center
    rad = math.sqrt(eps)
    xy = mask.cell_centers()
    r = np.hypot(xy[:, 0] - cx, xy[:, 1] - cy)
    if not clip:
        h = mask.h
        x0, y0 = mask.origin
        i = np.arange(mask.nx)
        j = np.arange(mask.ny)
        X, Y = np.meshgrid(x0 + (i + 0.5) * h, y0 + (j + 0.5) * h)
        inside = np.hypot(X - cx, Y - cy) <= rad
        if not inside.any() or np.any(inside & ~mask.active):
            raise TentSupportError(f"tent support of radius {rad:.4g} around ({cx:.4g}, {cy:.4g}) leaves the domain")
        if (cx - rad < x0 or cy - rad < y0 or cx + rad > x0 + mask.nx * h or cy + rad > y0 + mask.ny * h):
            raise TentSupportError("tent support leaves the lattice")
    return np.where(r <= rad, (1.0 - r / rad) / eps, 0.0)


def tent_centers(mask, eps, n, rng):
    """``n`` random active cell centres (support clipping is up to the caller)."""
    xy = mask.cell_centers()
    picks = rng.integers(0, mask.n_cells, size=n)
    return [tuple(xy[k]) for k in picks]


def tent_moments(eps, k):
    """``(int tent^k, int |grad tent|^2)`` in closed form.

    ``int tent^k = 2 pi / ((k+2)(k+1)) * eps^(1-k)`` and
    ``int |grad tent|^2 = pi / eps^2``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    return 2.0 * math.pi / ((k + 2) * (k + 1)) * eps ** (1 - k), math.pi / eps ** 2


# ------------------------------------------------------------ ray energies

def _tail_series(x, terms=None):
    """``sum_{k>=3} x^k / (k+2)!`` by direct summation."""
    if x == 0.0:
        return 0.0
    term = x ** 3 / 120.0
    total = 0.0
    k = 3
    while True:
        total += term
        nxt = term * x / (k + 3)
        k += 1
        if terms is not None:
            if k - 3 >= terms:
                return total
        elif k > x and nxt <= 1e-17 * total:
            return total
        term = nxt


def ray_profile(delta, x, terms=None):
    """Energy along the tent ray divided by ``eps``, as a function of ``x = t / eps``.

    Vectorised over ``x >= 0``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("ray parameter must be nonnegative")
    if np.any(x > SATURATION):
        raise SaturationError(f"ray parameter {np.max(x):.6g} exceeds {SATURATION:g}")
    A = quadratic_coefficient(delta)
    tail = np.vectorize(lambda s: _tail_series(float(s), terms), otypes=[float])(x)
    out = A * x * x - 2.0 * math.pi * tail
    return out if out.ndim else float(out)


def tent_ray_energy(delta, eps, t, terms=None):
    """Series value of the energy of ``t * tent`` (exponential family)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return eps * ray_profile(delta, t / eps, terms)


def quadratic_coefficient(delta):
    return 0.5 * math.pi * (1.0 + delta / 6.0)


CUBIC_COEFFICIENT = 2.0 * math.pi


def cubic_bound(delta, x):
    """``A x^2 - 2 pi x^3 / 5!``, an upper bound of :func:`ray_profile`."""
    x = np.asarray(x, dtype=float)
    out = quadratic_coefficient(delta) * x * x - CUBIC_COEFFICIENT * x ** 3 / 120.0
    return out if out.ndim else float(out)


def profile_and_bound(delta, x):
    """``(ray_profile(delta, x), cubic_bound(delta, x))``."""
    return ray_profile(delta, x), cubic_bound(delta, x)


def cubic_bound_max(delta):
    """``(argmax, max)`` of :func:`cubic_bound`: ``80 A / B`` and ``6400 A^3 / (3 B^2)``."""
    A, B = quadratic_coefficient(delta), CUBIC_COEFFICIENT
    return 80.0 * A / B, 6400.0 * A ** 3 / (3.0 * B * B)


# ----------------------------------------------------------- path algorithm

@dataclass
class PathState:
    """Path ``t_i * direction``, ``i = 0..P``, from 0 to a negative-energy point."""

    direction: np.ndarray = field(repr=False)
    t: np.ndarray
    energies: np.ndarray
    max_index: int

    @property
    def vertices(self):
        return self.t[:, None] * self.direction[None, :]

    @property
    def max_energy(self):
        return float(self.energies[self.max_index])


@dataclass
class TraceRow:
    iteration: int
    max_index: int
    max_energy: float
    grad_norm_at_max: float


@dataclass
class MountainPassRun:
    report: object
    path: PathState
    trace: list
    descent_converged: bool
    message: str = ""
    pass_point: np.ndarray = field(default=None, repr=False)


class _Ray:
    """Energy restricted to the ray ``t * v`` with the Dirichlet part cached."""

    def __init__(self, cfg, v):
        self.cfg = cfg
        self.v = v
        self.quad = cfg.epsilon * dirichlet_term(cfg.mask, v)
        self.area = cfg.mask.cell_area

    def energy(self, t):
        return 0.5 * self.quad * t * t - self.area * float(np.sum(self.cfg.spec.F(t * self.v)))

    def slope(self, t):
        return self.quad * t - self.area * float(self.cfg.spec.f(t * self.v) @ self.v)


def _ray_maximum(cfg, v, points, t_hint=None):
    """Maximise the energy on the ray through ``v``; ``None`` if it never turns negative."""
    ray = _Ray(cfg, v)
    vmax = float(np.max(v))
    if vmax <= 0:
        return None
    t_cap = SATURATION / vmax if cfg.spec.family == "exp" else 1e6 / max(vmax, 1e-300)
    T = t_hint if t_hint else 1.0 / vmax
    try:
        while ray.energy(T) >= 0.0:
            T *= 1.5
            if T > t_cap:
                return None
    except SaturationError:
        return None

    for _ in range(40):
        t = np.linspace(0.0, T, points + 1)
        e = np.array([ray.energy(s) for s in t])
        k = int(np.argmax(e))
        if k > 0:
            break
        T = t[1]
    else:
        return None

    lo, hi = t[k - 1], t[min(k + 1, points)]
    try:
        if ray.slope(lo) > 0 > ray.slope(hi):
            ts = optimize.brentq(ray.slope, lo, hi, xtol=1e-14 * hi, rtol=1e-14)
        else:
            ts = optimize.minimize_scalar(lambda s: -ray.energy(s), bounds=(lo, hi), method="bounded",
                                          options={"xatol": 1e-12 * hi}).x
    except SaturationError:
        return None
    es = ray.energy(ts)
    if es < e[k]:
        ts, es = t[k], e[k]
    # place the refined maximiser on the path so the reported max is exact
    t[k], e[k] = ts, es
    return PathState(v, t, e, k)


def energy_norm_operator(cfg):
    """``eps L + m h^2 I`` with ``m = -f'(0)`` (or 1): Riesz map of the energy norm."""
    mask = cfg.mask
    m = cfg.spec.linear_decay() * mask.cell_area
    eps = cfg.epsilon
    return SymmetricOperator(lambda v: eps * laplacian_apply(mask, v) + m * v, mask.n_cells,
                             diagonal=eps * mask.degree + m, norm_estimate=8 * eps + m)


def run_mountain_pass(cfg, path_points=40, tol=1e-10, seed=0, center=None, handoff=1e-3,
                      maxiter=2000, start=None, polish=True):
    """Mountain-pass search from the tent ray, then Newton polish.

    ``start`` overrides the initial direction (default: the tent centred at
    ``center``, or at a seeded random admissible cell centre when
    ``center == "random"``).  The descent stops once
    ``||grad E|| <= handoff * (eps ||L u|| + h^2 ||f(u)||)`` or the scaled
    residual is below ``10 tol``.
    """
    mask = cfg.mask
    rng = np.random.default_rng(seed)
    if start is not None:
        w = np.asarray(start, dtype=float)
    else:
        if center == "random":
            xy = mask.cell_centers()
            for k in rng.permutation(mask.n_cells):
                try:
                    w = build_tent(mask, cfg.epsilon, center=tuple(xy[k]))
                    break
                except TentSupportError:
                    continue
            else:
                raise TentSupportError("no admissible tent centre in the domain")
        else:
            w = build_tent(mask, cfg.epsilon, center=center)

    M = energy_norm_operator(cfg)

    def normalise(v):
        return v / math.sqrt(float(v @ M(v)))

    trace = []
    path = _ray_maximum(cfg, normalise(w), path_points)
    message = ""
    if path is None:
        # fall back to the constant direction, along which the energy eventually decreases
        path = _ray_maximum(cfg, normalise(np.ones(mask.n_cells)), path_points)
        if path is None:
            raise ArithmeticError("no negative-energy endpoint along the tent or constant rays")
        message = "tent ray never turned negative; started from constants"

    v = path.direction
    t = path.t[path.max_index]
    E = path.max_energy
    u = t * v
    step = 1.0
    converged = False

    for it in range(maxiter):
        g = gradient(cfg, u)
        gn = float(np.linalg.norm(g))
        trace.append(TraceRow(it, path.max_index, E, gn))
        scale = cfg.epsilon * float(np.linalg.norm(laplacian_apply(mask, u))) \
            + mask.cell_area * float(np.linalg.norm(cfg.spec.f(u)))
        if gn <= handoff * scale or scaled_residual(cfg, u, g) <= 10 * tol:
            converged = True
            break
        d, _ = cg_solve(M, g, tol=1e-8, maxit=2000)
        slope = float(g @ d)
        s = step
        accepted = False
        while s >= 1e-14:
            trial = _ray_maximum(cfg, normalise(u - s * d), path_points, t_hint=path.t[-1])
            if trial is not None and trial.max_energy <= E - 1e-4 * s * slope:
                accepted = True
                break
            s *= 0.5
        if not accepted:
            message = f"descent stalled at iteration {it} (step below 1e-14)"
            break
        path = trial
        v = path.direction
        E = path.max_energy
        u = path.t[path.max_index] * v
        step = min(1.0, 2.0 * s)
    else:
        message = f"descent hit maxiter={maxiter}"

    log.info("mountain pass: %d descent iterations, max energy %.6g, %s", len(trace), E,
             message or "handoff reached")
    pass_point = u.copy()
    if not polish:
        report = make_report(cfg, u, scaled_residual(cfg, u), 0, False, "not polished", False)
    else:
        report = newton_solve(cfg, u, tol=tol)
        if message and not report.converged:
            report.message = f"{message}; {report.message}"
    return MountainPassRun(report, path, trace, converged, message, pass_point)
