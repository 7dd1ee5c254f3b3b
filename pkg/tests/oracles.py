"""Reference computations that share no code with the package's solvers."""

import numpy as np


def bisect(f, lo, hi, iters=200):
    # plain bisection, f(lo) < 0 < f(hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if f(mid) < 0 else (lo, mid)
    return 0.5 * (lo + hi)


def lattice_laplacian(mask):
    """Graph Laplacian from a double loop over lattice neighbours of the active map."""
    index = -np.ones(mask.active.shape, dtype=int)
    index[mask.active] = np.arange(mask.n_cells)
    L = np.zeros((mask.n_cells, mask.n_cells))
    ny, nx = mask.active.shape
    for j in range(ny):
        for i in range(nx):
            a = index[j, i]
            if a < 0:
                continue
            for dj, di in ((0, 1), (1, 0)):
                jj, ii = j + dj, i + di
                if jj < ny and ii < nx and index[jj, ii] >= 0:
                    b = index[jj, ii]
                    L[a, a] += 1
                    L[b, b] += 1
                    L[a, b] -= 1
                    L[b, a] -= 1
    return L


def dense_energy(mask, spec, eps, u):
    L = lattice_laplacian(mask)
    return 0.5 * eps * u @ L @ u - mask.h ** 2 * float(np.sum(spec.F(u)))


def fd_gradient(energy, u, step=1e-5):
    """Central differences of ``energy`` along every coordinate."""
    g = np.empty_like(u)
    e = np.zeros_like(u)
    for i in range(u.size):
        e[i] = step
        g[i] = (energy(u + e) - energy(u - e)) / (2 * step)
        e[i] = 0.0
    return g
