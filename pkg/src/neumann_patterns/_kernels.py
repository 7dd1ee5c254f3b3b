"""Hot inner loops over the cell/face structure of a mask.

Two interchangeable backends are provided: ``numba`` (compiled with
``@njit``) and ``numpy`` (vectorised, no compilation).  The numba backend
is used when numba imports and the environment variable
``NEUMANN_PATTERNS_NUMBA`` is not set to ``0``/``false``/``off``.  Both
backends are always importable as :data:`numpy_backend` and
:data:`numba_backend` (the latter is ``None`` without numba) so they can
be benchmarked against each other.
"""

import os
from types import SimpleNamespace

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is optional
    numba = None

_FALSE = {"0", "false", "no", "off"}


def _numba_requested():
    return os.environ.get("NEUMANN_PATTERNS_NUMBA", "1").strip().lower() not in _FALSE


# ---------------------------------------------------------------- numpy path

def _laplacian_np(neighbors, faces, u):
    # face differences first so that constants give exact zeros
    d = u[faces[:, 0]] - u[faces[:, 1]]
    n = u.shape[0]
    return (np.bincount(faces[:, 0], weights=d, minlength=n)
            - np.bincount(faces[:, 1], weights=d, minlength=n))


def _dirichlet_np(faces, u):
    d = u[faces[:, 0]] - u[faces[:, 1]]
    return float(d @ d)


numpy_backend = SimpleNamespace(
    name="numpy",
    laplacian=_laplacian_np,
    dirichlet=_dirichlet_np,
)


# ---------------------------------------------------------------- numba path

if numba is not None:

    @numba.njit(cache=True, fastmath=False)
    def _laplacian_nb_core(neighbors, u):
        n = neighbors.shape[0]
        out = np.empty(n)
        for c in range(n):
            uc = u[c]
            acc = 0.0
            for k in range(4):
                m = neighbors[c, k]
                if m >= 0:
                    acc += uc - u[m]
            out[c] = acc
        return out

    @numba.njit(cache=True, fastmath=False)
    def _dirichlet_nb_core(faces, u):
        acc = 0.0
        for e in range(faces.shape[0]):
            d = u[faces[e, 0]] - u[faces[e, 1]]
            acc += d * d
        return acc

    def _laplacian_nb(neighbors, faces, u):
        return _laplacian_nb_core(neighbors, np.ascontiguousarray(u, dtype=np.float64))

    def _dirichlet_nb(faces, u):
        return float(_dirichlet_nb_core(faces, np.ascontiguousarray(u, dtype=np.float64)))

    numba_backend = SimpleNamespace(
        name="numba",
        laplacian=_laplacian_nb,
        dirichlet=_dirichlet_nb,
    )
else:  # pragma: no cover
    numba_backend = None


def select_backend(name=None):
    """Return the backend namespace for ``name`` (``"numba"``/``"numpy"``).

    With ``name=None`` the environment flag decides.
    """
    if name is None:
        name = "numba" if (numba_backend is not None and _numba_requested()) else "numpy"
    if name == "numba":
        if numba_backend is None:
            raise RuntimeError("numba backend requested but numba is not installed")
        return numba_backend
    if name == "numpy":
        return numpy_backend
    raise ValueError(f"unknown backend {name!r}")


backend = select_backend()


def use_backend(name=None):
    """Switch the active backend at run time; returns it."""
    global backend
    backend = select_backend(name)
    return backend
