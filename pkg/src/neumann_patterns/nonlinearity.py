"""Catalog of reaction terms ``f`` with derivative ``f'`` and antiderivative ``F``.

Every family is normalised so that ``F(0) = 0``.  All evaluations are
vectorised over numpy arrays.  The exponential family refuses arguments
above :data:`SATURATION` rather than returning ``inf``.
"""

import math
from dataclasses import dataclass

import numpy as np

SATURATION = 700.0

FAMILIES = ("exp", "power", "cubic", "linear", "polynomial")


class SaturationError(ArithmeticError):
    """``e^t`` would overflow (t above the saturation threshold)."""


class NoPositiveRootError(ValueError):
    pass


@dataclass(frozen=True)
class NonlinearitySpec:
    """A member of the catalog.

    ``params`` is a tuple of ``(name, value)`` pairs so the spec stays
    hashable; use :meth:`param` to read values.

    * ``exp``: ``f(t) = e^t - 1 - (1 + delta) t``
    * ``power``: ``f(t) = t^p - t``
    * ``cubic``: ``f(t) = -t^3``
    * ``linear``: ``f(t) = mu t``
    * ``polynomial``: ``f(t) = sum_k coeffs[k] t^k``
    """

    family: str
    params: tuple = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown nonlinearity family {self.family!r}")

    def param(self, name):
        for k, v in self.params:
            if k == name:
                return v
        raise KeyError(name)

    @property
    def label(self):
        if self.family == "polynomial":
            return "polynomial:coeffs=" + "/".join(f"{c:g}" for c in self.param("coeffs"))
        if not self.params:
            return self.family
        return self.family + ":" + ",".join(f"{k}={v:g}" for k, v in self.params)

    # -- evaluation ---------------------------------------------------------

    def _check(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "exp" and t.size and np.max(t) > SATURATION:
            raise SaturationError(f"exp nonlinearity evaluated at t={np.max(t):.6g} > {SATURATION:g}")
        if self.family == "power":
            p = self.param("p")
            if p != int(p) and t.size and np.min(t) < 0:
                raise ValueError(f"power nonlinearity with non-integer p={p} needs t >= 0")
        return t

    def f(self, t):
        t = self._check(t)
        fam = self.family
        if fam == "exp":
            return np.expm1(t) - (1.0 + self.param("delta")) * t
        if fam == "power":
            return t ** self.param("p") - t
        if fam == "cubic":
            return -t ** 3
        if fam == "linear":
            return self.param("mu") * t
        return np.polynomial.polynomial.polyval(t, self.param("coeffs"))

    def df(self, t):
        t = self._check(t)
        fam = self.family
        if fam == "exp":
            return np.exp(t) - (1.0 + self.param("delta"))
        if fam == "power":
            p = self.param("p")
            return p * t ** (p - 1) - 1.0
        if fam == "cubic":
            return -3.0 * t ** 2
        if fam == "linear":
            return np.full_like(t, self.param("mu"))
        c = np.asarray(self.param("coeffs"), dtype=float)
        return np.polynomial.polynomial.polyval(t, np.polynomial.polynomial.polyder(c))

    def F(self, t):
        t = self._check(t)
        fam = self.family
        if fam == "exp":
            return np.expm1(t) - t - (1.0 + self.param("delta")) * t * t / 2
        if fam == "power":
            p = self.param("p")
            return t ** (p + 1) / (p + 1) - t * t / 2
        if fam == "cubic":
            return -t ** 4 / 4
        if fam == "linear":
            return self.param("mu") * t * t / 2
        c = np.asarray(self.param("coeffs"), dtype=float)
        return np.polynomial.polynomial.polyval(t, np.polynomial.polynomial.polyint(c))

    def evaluate(self, t):
        """Return the triple ``(f(t), f'(t), F(t))``."""
        return self.f(t), self.df(t), self.F(t)

    def linear_decay(self):
        """``-f'(0)`` when positive, else 1; weight of the mass term in the
        energy norm ``eps |grad u|^2 + m u^2`` used by the descent methods."""
        m = -float(self.df(0.0))
        return m if m > 0 else 1.0


def exp_family(delta):
    return NonlinearitySpec("exp", (("delta", float(delta)),))


def power(p):
    if not p > 1:
        raise ValueError("power family needs p > 1")
    return NonlinearitySpec("power", (("p", float(p)),))


def cubic():
    return NonlinearitySpec("cubic")


def linear(mu):
    return NonlinearitySpec("linear", (("mu", float(mu)),))


def polynomial(coeffs):
    coeffs = tuple(float(c) for c in coeffs)
    if not coeffs:
        raise ValueError("polynomial needs at least one coefficient")
    return NonlinearitySpec("polynomial", (("coeffs", coeffs),))


def parse_nonlinearity(text):
    """Parse a CLI string such as ``exp:delta=1``, ``power:p=3``, ``cubic``,
    ``linear:mu=-1`` or ``polynomial:coeffs=0/1/0/-1`` (ascending powers)."""
    name, _, rest = text.strip().partition(":")
    name = name.strip().lower()
    kv = {}
    if rest.strip():
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise ValueError(f"malformed nonlinearity parameter {item!r}")
            kv[key.strip()] = val.strip()
    builders = {
        "exp": lambda: exp_family(float(kv.pop("delta", "1"))),
        "power": lambda: power(float(kv.pop("p", "3"))),
        "cubic": cubic,
        "linear": lambda: linear(float(kv.pop("mu", "-1"))),
        "polynomial": lambda: polynomial(float(c) for c in kv.pop("coeffs").split("/")),
    }
    if name not in builders:
        raise ValueError(f"unknown nonlinearity family {name!r}; expected one of {', '.join(FAMILIES)}")
    try:
        spec = builders[name]()
    except KeyError as exc:
        raise ValueError(f"nonlinearity {name!r} is missing parameter {exc}") from None
    if kv:
        raise ValueError(f"unknown parameters for {name}: {sorted(kv)}")
    return spec


# ------------------------------------------------------------------- roots

def find_positive_root(spec, tol=1e-12):
    """Positive zero of ``f`` for the exp (``delta > 0``) and power families.

    Bracketing bisection followed by a Newton polish.
    """
    if spec.family == "power":
        return 1.0
    if spec.family != "exp":
        raise NoPositiveRootError(f"no positive-root finder for family {spec.family!r}")
    delta = spec.param("delta")
    if not delta > 0:
        # f_a >= 0 on (0, inf) when a <= 1
        raise NoPositiveRootError(f"exp family with delta={delta} has no positive root")

    a = 1.0 + delta
    f = lambda t: math.expm1(t) - a * t  # noqa: E731
    lo, hi = min(1e-6, delta), 10.0 + 10.0 * delta
    if not (f(lo) < 0 < f(hi)):
        raise NoPositiveRootError(f"root bracket [{lo}, {hi}] failed for delta={delta}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    t = 0.5 * (lo + hi)
    for _ in range(5):
        step = f(t) / (math.exp(t) - a)
        t -= step
        if abs(step) <= 1e-16 * t:
            break
    if abs(f(t)) > tol * max(1.0, math.exp(t)):
        raise ArithmeticError(f"root polish failed: |f({t})| = {abs(f(t)):.3e}")
    return t


def root_energy_density(delta):
    """Energy per unit area of the constant state at the positive root,
    ``(1 + delta) r^2 / 2 - (e^r - 1 - r)``.  Positive for ``delta > 0``."""
    r = find_positive_root(exp_family(delta))
    return (1.0 + delta) / 2 * r * r - (math.expm1(r) - r)


def root_energy_identity(x):
    """``(e^x / 2) x - e^x + 1 + x / 2``; equals the root energy density at the
    positive root.  Vanishes to third order at 0 and is convex on x > 0."""
    x = np.asarray(x, dtype=float)
    return np.exp(x) * x / 2 - np.expm1(x) + x / 2


# ---------------------------------------------------------- structure checks

@dataclass(frozen=True)
class ConditionReport:
    holds: bool
    worst_t: float
    worst_value: float
    interval: tuple
    n: int
    sign: int = 0

    def __str__(self):
        verdict = "holds" if self.holds else "fails"
        return (f"{verdict} on [{self.interval[0]:g}, {self.interval[1]:g}] "
                f"({self.n} samples); worst t={self.worst_t:.6g} value={self.worst_value:.6g}")


def _samples(interval, n):
    lo, hi = map(float, interval)
    if not lo < hi:
        raise ValueError("interval must satisfy lo < hi")
    if n < 2:
        raise ValueError("need at least two samples")
    return np.linspace(lo, hi, int(n))


def check_monotone_sign(spec, root, interval=(-10.0, 10.0), n=10_000):
    """Sampled test of ``f(t) (t - root) <= 0`` on ``interval``.

    A heuristic on finitely many points, not a proof.  Fails if the largest
    sampled value exceeds ``1e-12`` times the largest magnitude seen.
    """
    t = _samples(interval, n)
    with np.errstate(over="ignore", invalid="ignore"):
        vals = spec.f(np.minimum(t, SATURATION)) * (t - root)
    k = int(np.argmax(vals))
    scale = max(1.0, float(np.max(np.abs(vals))))
    return ConditionReport(bool(vals[k] <= 1e-12 * scale), float(t[k]), float(vals[k]),
                           (float(t[0]), float(t[-1])), int(n))


def check_single_sign(spec, interval=(-20.0, 20.0), n=10_000):
    """Sampled test that ``f`` is one-signed on ``interval``.

    ``sign`` is +1 (f >= 0), -1 (f <= 0) or 0 (changes sign).  ``worst_t``
    is the sample most violating the better of the two candidate signs.
    """
    t = _samples(interval, n)
    vals = spec.f(np.minimum(t, SATURATION))
    scale = max(1.0, float(np.max(np.abs(vals))))
    lo, hi = int(np.argmin(vals)), int(np.argmax(vals))
    if vals[lo] >= -1e-12 * scale:
        return ConditionReport(True, float(t[lo]), float(vals[lo]), (float(t[0]), float(t[-1])), int(n), 1)
    if vals[hi] <= 1e-12 * scale:
        return ConditionReport(True, float(t[hi]), float(vals[hi]), (float(t[0]), float(t[-1])), int(n), -1)
    k = lo if -vals[lo] <= vals[hi] else hi
    return ConditionReport(False, float(t[k]), float(vals[k]), (float(t[0]), float(t[-1])), int(n), 0)


@dataclass(frozen=True)
class FactorizationReport:
    factor_positive: bool
    profile_nonincreasing: bool
    roots: tuple
    condition_holds: bool


def check_factorization(weight, profile, interval=(-10.0, 10.0), n=10_000):
    """For ``f = weight * profile``: check ``weight > 0`` and ``profile``
    nonincreasing on samples, locate sign changes of ``profile`` and run
    :func:`check_monotone_sign` on the product at each of them."""
    t = _samples(interval, n)
    w = np.asarray(weight(t), dtype=float)
    p = np.asarray(profile(t), dtype=float)
    positive = bool(np.all(w > 0))
    nonincreasing = bool(np.all(np.diff(p) <= 1e-12 * max(1.0, np.max(np.abs(p)))))

    roots = []
    for i in np.flatnonzero(p == 0):
        roots.append(float(t[i]))
    for i in np.flatnonzero(p[:-1] * p[1:] < 0):
        # linear interpolation inside the bracketing sample pair
        roots.append(float(t[i] - p[i] * (t[i + 1] - t[i]) / (p[i + 1] - p[i])))

    holds = True
    for r in roots:
        vals = w * p * (t - r)
        scale = max(1.0, float(np.max(np.abs(vals))))
        holds &= bool(np.max(vals) <= 1e-9 * scale)
    return FactorizationReport(positive, nonincreasing, tuple(roots), holds)
