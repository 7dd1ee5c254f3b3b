"""Matrix-free symmetric linear algebra: CG, MINRES and extremal eigenpairs."""

from dataclasses import dataclass

import numpy as np
from scipy.sparse import linalg as spla


class EigenError(ArithmeticError):
    def __init__(self, message, ritz_values=()):
        super().__init__(message)
        self.ritz_values = tuple(ritz_values)


class SymmetricOperator:
    """A symmetric map on R^n given by ``apply``.

    ``diagonal`` (optional) feeds the Jacobi preconditioner and the norm
    estimate.
    """

    def __init__(self, apply, n, diagonal=None, norm_estimate=None):
        self.apply = apply
        self.n = int(n)
        self.diagonal = None if diagonal is None else np.asarray(diagonal, dtype=float)
        self._norm = norm_estimate

    def __call__(self, v):
        return self.apply(v)

    @classmethod
    def from_matrix(cls, A):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("need a square matrix")
        return cls(lambda v: A @ v, A.shape[0], diagonal=np.diag(A).copy(),
                   norm_estimate=float(np.max(np.sum(np.abs(A), axis=1))))

    @classmethod
    def identity(cls, n):
        return cls(lambda v: np.array(v, dtype=float), n, diagonal=np.ones(n), norm_estimate=1.0)

    def norm_estimate(self):
        """Upper-ish estimate of the spectral norm (power iteration, cached)."""
        if self._norm is None:
            rng = np.random.default_rng(12345)
            v = rng.standard_normal(self.n)
            v /= np.linalg.norm(v)
            est = 0.0
            for _ in range(30):
                w = self.apply(v)
                est = float(np.linalg.norm(w))
                if est == 0.0:
                    break
                v = w / est
            self._norm = 1.05 * est if est > 0 else 1.0
        return self._norm

    def to_dense(self):
        eye = np.eye(self.n)
        return np.column_stack([self.apply(eye[:, i]) for i in range(self.n)])

    def as_scipy(self):
        return spla.LinearOperator((self.n, self.n), matvec=self.apply, dtype=float)


@dataclass
class SolveInfo:
    converged: bool
    iterations: int
    residual: float
    negative_curvature: bool = False
    message: str = ""


def _jacobi(op):
    if op.diagonal is None:
        return None
    d = np.abs(op.diagonal)
    floor = 1e-14 * max(1.0, float(d.max()))
    return 1.0 / np.maximum(d, floor)


def cg_solve(op, rhs, tol=1e-10, maxit=None, project_mean_zero=False, precondition=True, x0=None):
    """Preconditioned conjugate gradients for ``op x = rhs``.

    Stops when ``||op x - rhs|| <= tol ||rhs||``.  With ``project_mean_zero``
    the solve is restricted to mean-zero vectors (for operators whose kernel
    is the constants); ``rhs`` must then have zero mean.  Meeting a direction
    of non-positive curvature stops the iteration with
    ``info.negative_curvature`` set.
    """
    b = np.asarray(rhs, dtype=float)
    n = op.n
    if b.shape != (n,):
        raise ValueError(f"rhs of shape {b.shape} does not match operator dimension {n}")
    bnorm = float(np.linalg.norm(b))
    if project_mean_zero and abs(b.mean()) > 1e-12 * max(bnorm / np.sqrt(n), 1e-300):
        raise ValueError(f"rhs has mean {b.mean():.3e}; a mean-zero rhs is required with projection")
    maxit = 10 * n if maxit is None else int(maxit)

    def proj(v):
        return v - v.mean() if project_mean_zero else v

    if bnorm == 0.0:
        return np.zeros(n), SolveInfo(True, 0, 0.0)
    minv = _jacobi(op) if precondition else None

    x = np.zeros(n) if x0 is None else proj(np.array(x0, dtype=float))
    r = b - op(x) if x0 is not None else b.copy()
    r = proj(r)
    z = proj(minv * r) if minv is not None else r.copy()
    p = z.copy()
    rz = float(r @ z)
    target = tol * bnorm
    rnorm = float(np.linalg.norm(r))
    it = 0
    while rnorm > target and it < maxit:
        Ap = op(p)
        if project_mean_zero:
            Ap = proj(Ap)
        curv = float(p @ Ap)
        if curv <= 0.0:
            return x, SolveInfo(False, it, rnorm / bnorm, True, f"non-positive curvature {curv:.3e}")
        alpha = rz / curv
        x += alpha * p
        r -= alpha * Ap
        if project_mean_zero:
            x = proj(x)
            r = proj(r)
        it += 1
        rnorm = float(np.linalg.norm(r))
        z = proj(minv * r) if minv is not None else r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    true_res = float(np.linalg.norm(proj(b - op(x)))) / bnorm
    ok = true_res <= max(tol, 1e-15) * 10
    msg = "" if ok else f"no convergence after {it} iterations (residual {true_res:.3e})"
    return x, SolveInfo(ok, it, true_res, False, msg)


def minres_solve(op, rhs, tol=1e-10, maxit=None, precondition=True):
    """Preconditioned MINRES for symmetric, possibly indefinite ``op``.

    Stops when the preconditioned residual norm has dropped by ``tol``; the
    returned ``info.residual`` is the true relative residual.
    """
    b = np.asarray(rhs, dtype=float)
    n = op.n
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros(n), SolveInfo(True, 0, 0.0)
    minv = _jacobi(op) if precondition else None
    if minv is None:
        minv = np.ones(n)
    maxit = 10 * n if maxit is None else int(maxit)

    x = np.zeros(n)
    v_old = np.zeros(n)
    v = b.copy()
    z = minv * v
    gamma = float(np.sqrt(z @ v))
    gamma_old = 1.0
    eta = gamma
    target = tol * gamma
    c_old = c = 1.0
    s_old = s = 0.0
    w_old = np.zeros(n)
    w = np.zeros(n)
    it = 0
    while abs(eta) > target and it < maxit:
        z = z / gamma
        Az = op(z)
        delta = float(Az @ z)
        v_new = Az - (delta / gamma) * v - (gamma / gamma_old) * v_old
        z_new = minv * v_new
        gamma_new = float(np.sqrt(max(z_new @ v_new, 0.0)))
        a0 = c * delta - c_old * s * gamma
        a1 = float(np.hypot(a0, gamma_new))
        a2 = s * delta + c_old * c * gamma
        a3 = s_old * gamma
        if a1 == 0.0:
            break
        c_new, s_new = a0 / a1, gamma_new / a1
        w_new = (z - a3 * w_old - a2 * w) / a1
        x += c_new * eta * w_new
        eta = -s_new * eta
        it += 1
        if gamma_new == 0.0:
            break
        v_old, v, z = v, v_new, z_new
        gamma_old, gamma = gamma, gamma_new
        w_old, w = w, w_new
        c_old, c = c, c_new
        s_old, s = s, s_new
    res = float(np.linalg.norm(b - op(x))) / bnorm
    ok = res <= 10 * tol
    return x, SolveInfo(ok, it, res, False, "" if ok else f"MINRES residual {res:.3e} after {it} iterations")


def _orthonormal(vectors, n):
    Q = np.asarray(vectors, dtype=float).reshape(-1, n).T
    Q, _ = np.linalg.qr(Q)
    return Q


def _deflated(apply, Q, shift):
    """``apply`` restricted to the complement of ``range(Q)``; ``range(Q)``
    is mapped to ``shift`` so it sits above the wanted eigenvalues."""
    if Q is None:
        return apply

    def out(v):
        v = np.asarray(v, dtype=float).ravel()
        c = Q.T @ v
        w = v - Q @ c
        Aw = apply(w)
        return Aw - Q @ (Q.T @ Aw) + shift * (Q @ c)

    return out


def _lanczos(apply, n, k, tol, maxiter, Q, norm, seed=2024):
    # ARPACK's test is relative to |lambda|, hopeless at lambda = 0: shift the
    # spectrum into [1, 2||A|| + 1] so the test becomes relative to ||A||
    sigma = norm + 1.0
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n)
    if Q is not None:
        v0 -= Q @ (Q.T @ v0)
    ncv = min(n, max(2 * k + 1, 20))
    lin = spla.LinearOperator((n, n), matvec=lambda v: apply(v) + sigma * np.ravel(v), dtype=float)
    try:
        vals, vecs = spla.eigsh(lin, k=k, which="SA", tol=tol, v0=v0, ncv=ncv, maxiter=maxiter or max(1000, n))
    except spla.ArpackNoConvergence as exc:
        raise EigenError(f"Lanczos did not converge: {exc}", np.asarray(exc.eigenvalues) - sigma) from None
    order = np.argsort(vals)
    return vals[order] - sigma, vecs[:, order]


def smallest_eigenpairs(op, k=1, tol=1e-10, deflate=None, method="auto", maxiter=None):
    """The ``k`` smallest eigenpairs of a symmetric operator, ascending.

    ``deflate`` is a vector (or list of vectors) assumed to span an invariant
    subspace; it is projected out and the returned pairs live in its
    orthogonal complement.  The iterative route is implicitly restarted
    Lanczos (ARPACK) followed by a locking pass that recovers copies of
    repeated eigenvalues a single Krylov space can miss; ``method="dense"``
    assembles the matrix instead.  Each returned pair satisfies
    ``||A v - lam v|| <= tol * ||A||`` (``||A||`` estimated) or
    :class:`EigenError` is raised.
    """
    n = op.n
    if k < 1:
        raise ValueError("k must be >= 1")
    Q = None if deflate is None else _orthonormal(deflate, n)
    free = n - (0 if Q is None else Q.shape[1])
    if k > free:
        raise ValueError(f"requested {k} eigenpairs from a {free}-dimensional space")

    norm = op.norm_estimate()
    shift = 4.0 * norm + 1.0
    apply = _deflated(op.apply, Q, shift)

    if method == "auto":
        method = "dense" if n <= max(50, 2 * k + 2) else "lanczos"
    if method == "dense":
        eye = np.eye(n)
        A = np.column_stack([apply(eye[:, i]) for i in range(n)])
        A = 0.5 * (A + A.T)
        vals, vecs = np.linalg.eigh(A)
        vals, vecs = vals[:k], vecs[:, :k]
    elif method == "lanczos":
        vals, vecs = _lanczos(apply, n, k, tol, maxiter, Q, norm)
        # a Krylov space holds one direction per distinct eigenvalue, so copies
        # of a repeated one are found by fresh searches orthogonal to the rest
        for attempt in range(k if k > 1 else 0):
            if free <= k:
                break
            locked = vecs if Q is None else np.column_stack([Q, vecs])
            Ql = _orthonormal(locked.T, n)
            extra_val, extra_vec = _lanczos(_deflated(op.apply, Ql, shift), n, 1, tol, maxiter, Ql, norm,
                                            seed=2025 + attempt)
            if extra_val[0] >= vals[-1] - max(tol, 1e-13) * max(norm, 1.0):
                break
            pos = int(np.searchsorted(vals, extra_val[0]))
            vals = np.insert(vals, pos, extra_val[0])[:k]
            vecs = np.insert(vecs, pos, extra_vec[:, 0], axis=1)[:, :k]
    else:
        raise ValueError(f"unknown method {method!r}")

    # re-orthonormalise within (near-)degenerate clusters and check residuals
    vecs, _ = np.linalg.qr(vecs)
    AV = np.column_stack([op.apply(vecs[:, i]) for i in range(vecs.shape[1])])
    ritz = np.einsum("ij,ij->j", vecs, AV)
    order = np.argsort(ritz)
    ritz, vecs, AV = ritz[order], vecs[:, order], AV[:, order]
    resid = np.linalg.norm(AV - vecs * ritz, axis=0)
    bad = resid > max(tol, 1e-13) * max(norm, 1.0)
    if np.any(bad):
        raise EigenError(f"eigenpair residuals {resid[bad]} exceed {tol:g} * ||A||", ritz)
    return ritz, vecs


def dense_jacobi_eigh(A, tol=1e-14, max_sweeps=60):
    """Classical cyclic Jacobi rotations; test oracle for small symmetric matrices.

    Returns ascending eigenvalues and the matching orthonormal eigenvectors
    (as columns).
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or not np.allclose(A, A.T, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise ValueError("dense_jacobi_eigh needs a symmetric matrix")
    V = np.eye(n)
    scale = max(np.abs(A).max(), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(A, 1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap, aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        raise ArithmeticError("Jacobi rotations did not converge")
    vals = np.diag(A).copy()
    order = np.argsort(vals)
    return vals[order], V[:, order]
