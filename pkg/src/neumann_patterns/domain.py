"""Masked cell-centred Cartesian grids for bounded planar domains.

A domain is approximated by the set of lattice cells whose centres lie
inside it ("staircase" geometry).  Cells are squares of side ``h``; two
active cells sharing an edge are joined by a face.  Missing neighbours
are zero-flux walls, which is how the Neumann condition enters.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

SHAPES = ("rectangle", "disk", "annulus", "lshape")

_DEFAULTS = {
    "rectangle": {"width": 1.0, "height": 1.0},
    "disk": {"radius": 1.0},
    "annulus": {"inner": 0.5, "outer": 1.0},
    "lshape": {"side": 1.0},
}


class MaskError(ValueError):
    """Raised for empty, disconnected or otherwise invalid masks."""


def _cells_along(length, h):
    # lengths that are integer multiples of h must not pick up a spurious cell
    r = length / h
    n = round(r)
    if abs(r - n) <= 1e-9 * max(1.0, r):
        return int(n)
    return int(math.ceil(r))


@dataclass(frozen=True, eq=False)
class DomainMask:
    """Active cells of an ``ny x nx`` lattice with spacing ``h``.

    ``active[j, i]`` refers to the cell whose centre is
    ``(origin[0] + (i + 0.5) h, origin[1] + (j + 0.5) h)``.  Fields on the
    mask are 1-D arrays ordered like ``np.flatnonzero(active)`` (row-major,
    ``j`` slowest).
    """

    nx: int
    ny: int
    h: float
    active: np.ndarray
    shape_tag: str = "custom"
    origin: tuple = (0.0, 0.0)
    interior_point: tuple = None
    index: np.ndarray = field(init=False, repr=False)
    faces: np.ndarray = field(init=False, repr=False)
    neighbors: np.ndarray = field(init=False, repr=False)
    degree: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        active = np.asarray(self.active, dtype=bool)
        if active.shape != (self.ny, self.nx):
            raise MaskError(f"active map has shape {active.shape}, expected {(self.ny, self.nx)}")
        if not self.h > 0:
            raise MaskError("cell size h must be positive")
        n = int(active.sum())
        if n == 0:
            raise MaskError(f"{self.shape_tag}: no cell centre falls inside the shape at h={self.h}")
        _, ncomp = ndimage.label(active)
        if ncomp != 1:
            raise MaskError(f"{self.shape_tag}: active set has {ncomp} edge-connected components")

        index = np.full(active.shape, -1, dtype=np.int64)
        index[active] = np.arange(n)

        horiz = active[:, :-1] & active[:, 1:]
        vert = active[:-1, :] & active[1:, :]
        faces = np.concatenate([
            np.column_stack([index[:, :-1][horiz], index[:, 1:][horiz]]),
            np.column_stack([index[:-1, :][vert], index[1:, :][vert]]),
        ]).astype(np.int64)

        padded = np.pad(index, 1, constant_values=-1)
        jj, ii = np.nonzero(active)
        jj, ii = jj + 1, ii + 1
        neighbors = np.column_stack([
            padded[jj, ii - 1], padded[jj, ii + 1], padded[jj - 1, ii], padded[jj + 1, ii],
        ]).astype(np.int64)
        degree = (neighbors >= 0).sum(axis=1).astype(np.float64)

        for arr in (active, index, faces, neighbors, degree):
            arr.setflags(write=False)
        object.__setattr__(self, "active", active)
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "faces", np.ascontiguousarray(faces))
        object.__setattr__(self, "neighbors", np.ascontiguousarray(neighbors))
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        if self.interior_point is None:
            c = self.cell_centers().mean(axis=0)
            object.__setattr__(self, "interior_point", (float(c[0]), float(c[1])))

    @property
    def n_cells(self):
        return int(self.degree.shape[0])

    @property
    def n_faces(self):
        return int(self.faces.shape[0])

    @property
    def cell_area(self):
        return self.h * self.h

    def area(self):
        return self.n_cells * self.h * self.h

    def cell_centers(self):
        """(n_cells, 2) array of cell-centre coordinates."""
        jj, ii = np.nonzero(self.active)
        x = self.origin[0] + (ii + 0.5) * self.h
        y = self.origin[1] + (jj + 0.5) * self.h
        return np.column_stack([x, y])

    def to_grid(self, u, fill=np.nan):
        """Scatter a field onto the full ``ny x nx`` lattice."""
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n_cells,):
            raise ValueError(f"field of length {u.shape} does not match mask with {self.n_cells} cells")
        out = np.full((self.ny, self.nx), fill, dtype=float)
        out[self.active] = u
        return out

    def from_grid(self, grid):
        grid = np.asarray(grid, dtype=float)
        if grid.shape != (self.ny, self.nx):
            raise ValueError(f"grid shape {grid.shape} does not match mask {(self.ny, self.nx)}")
        return grid[self.active].copy()

    def constant(self, value):
        return np.full(self.n_cells, float(value))

    def l2_norm(self, u):
        """Grid approximation of the L^2(Omega) norm, ``h * ||u||_2``."""
        return self.h * float(np.linalg.norm(u))


def area(mask):
    return mask.area()


def parse_shape(text):
    """Parse ``"disk:radius=0.5"`` into ``("disk", {"radius": 0.5})``."""
    name, _, rest = text.partition(":")
    name = name.strip().lower()
    if name not in SHAPES:
        raise ValueError(f"unknown shape {name!r}; expected one of {', '.join(SHAPES)}")
    params = {}
    if rest.strip():
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise ValueError(f"malformed shape parameter {item!r}")
            params[key.strip()] = float(val)
    return name, params


def build_mask(shape, h, **params):
    """Build the staircase mask of ``shape`` at cell size ``h``.

    Shapes and their parameters (defaults in brackets):

    ``rectangle`` width [1], height [1], lower-left corner at the origin;
    ``disk`` radius [1], centred at the origin;
    ``annulus`` inner [0.5], outer [1], centred at the origin;
    ``lshape`` side [1]: the square ``[0, side]^2`` minus its upper-right
    quadrant.
    """
    if ":" in shape:
        shape, extra = parse_shape(shape)
        params = {**extra, **params}
    shape = shape.lower()
    if shape not in SHAPES:
        raise MaskError(f"unknown shape {shape!r}")
    unknown = set(params) - set(_DEFAULTS[shape])
    if unknown:
        raise MaskError(f"unknown parameters for {shape}: {sorted(unknown)}")
    p = {**_DEFAULTS[shape], **params}
    if not h > 0:
        raise MaskError("h must be positive")
    if any(not v > 0 for v in p.values()):
        raise MaskError(f"{shape} parameters must be positive, got {p}")

    if shape == "rectangle":
        nx, ny = _cells_along(p["width"], h), _cells_along(p["height"], h)
        origin = (0.0, 0.0)
        x, y = _centres(nx, ny, h, origin)
        active = (x <= p["width"]) & (y <= p["height"])
        interior = (p["width"] / 2, p["height"] / 2)
    elif shape in ("disk", "annulus"):
        R = p["radius"] if shape == "disk" else p["outer"]
        n = _cells_along(2 * R, h)
        origin = (-n * h / 2, -n * h / 2)
        x, y = _centres(n, n, h, origin)
        nx = ny = n
        rho2 = x * x + y * y
        active = rho2 <= R * R
        if shape == "annulus":
            if not p["inner"] < p["outer"]:
                raise MaskError("annulus inner radius must be smaller than the outer radius")
            active &= rho2 >= p["inner"] ** 2
            interior = (0.0, -(p["inner"] + p["outer"]) / 2)
        else:
            interior = (0.0, 0.0)
    else:
        s = p["side"]
        nx = ny = _cells_along(s, h)
        origin = (0.0, 0.0)
        x, y = _centres(nx, ny, h, origin)
        active = ~((x > s / 2) & (y > s / 2))
        interior = (s / 4, s / 4)

    return DomainMask(nx=nx, ny=ny, h=h, active=active, shape_tag=shape,
                      origin=origin, interior_point=interior)


def _centres(nx, ny, h, origin):
    x = origin[0] + (np.arange(nx) + 0.5) * h
    y = origin[1] + (np.arange(ny) + 0.5) * h
    return np.meshgrid(x, y)
