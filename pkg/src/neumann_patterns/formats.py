"""Plain-text dumps, CSV tables and PGM heatmaps.

Numbers are written with 12 significant digits.  Mask and field dumps share
the header ``nx ny h`` followed by ``ny`` lines of ``nx`` entries; line ``j``
holds lattice row ``j`` (``y`` increasing downwards through the file).
"""

import csv
import math

import numpy as np

from .domain import DomainMask


class FormatError(ValueError):
    pass


def fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def _header(mask):
    return f"{mask.nx} {mask.ny} {fmt(mask.h)}\n"


def write_mask(path, mask):
    with open(path, "w") as fh:
        fh.write(_header(mask))
        for row in mask.active:
            fh.write(" ".join("1" if a else "0" for a in row) + "\n")


def _read_grid(path, parse):
    try:
        with open(path) as fh:
            lines = [ln.split() for ln in fh if ln.strip()]
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if not lines or len(lines[0]) != 3:
        raise FormatError(f"{path}: expected header 'nx ny h'")
    try:
        nx, ny, h = int(lines[0][0]), int(lines[0][1]), float(lines[0][2])
    except ValueError as exc:
        raise FormatError(f"{path}: bad header: {exc}") from exc
    rows = lines[1:]
    if nx < 1 or ny < 1 or not h > 0 or len(rows) != ny or any(len(r) != nx for r in rows):
        raise FormatError(f"{path}: body does not match header {nx} x {ny}")
    try:
        grid = np.array([[parse(tok) for tok in r] for r in rows])
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return nx, ny, h, grid


def _mask_token(tok):
    if tok not in ("0", "1"):
        raise ValueError(f"mask entries must be 0 or 1, got {tok!r}")
    return tok == "1"


def read_mask(path):
    nx, ny, h, grid = _read_grid(path, _mask_token)
    try:
        return DomainMask(nx, ny, h, grid.astype(bool))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_field(path, mask, u):
    grid = mask.to_grid(u)
    with open(path, "w") as fh:
        fh.write(_header(mask))
        for row in grid:
            fh.write(" ".join(fmt(v) for v in row) + "\n")


def read_field(path):
    """Return ``(mask, u)``; the mask is the set of finite entries."""
    nx, ny, h, grid = _read_grid(path, float)
    grid = grid.astype(float)
    if np.any(np.isinf(grid)):
        raise FormatError(f"{path}: infinite values")
    try:
        mask = DomainMask(nx, ny, h, np.isfinite(grid))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return mask, mask.from_grid(grid)


RESULTS_COLUMNS = ("index", "converged", "classification", "constant_value", "energy", "residual",
                   "stability_index", "positive", "min_u", "max_u")
TRACE_COLUMNS = ("iter", "max_index", "max_energy", "grad_norm_at_max")
SWEEP_COLUMNS = ("epsilon", "c_epsilon", "distinct_count", "has_nonconstant", "threshold_ratio")


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def write_results(path, reports):
    _write_csv(path, RESULTS_COLUMNS, (
        (i, r.converged, r.classification, r.constant_value, r.energy, r.residual_norm,
         r.stability_index, r.positive, r.min_u, r.max_u) for i, r in enumerate(reports)))


def write_trace(path, trace):
    _write_csv(path, TRACE_COLUMNS, ((t.iteration, t.max_index, t.max_energy, t.grad_norm_at_max)
                                     for t in trace))


def write_sweep(path, rows):
    _write_csv(path, SWEEP_COLUMNS, ((r.epsilon, r.c_epsilon, r.distinct_count, r.has_nonconstant,
                                      r.threshold_ratio) for r in rows))


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ----------------------------------------------------------------- heatmap

DARKEST = 32  # active cells span DARKEST..255 so they never merge with inactive black
MID_GRAY = 128


def heatmap_pixels(mask, u):
    """8-bit image, top row = largest ``y``; inactive cells are 0."""
    u = np.asarray(u, dtype=float)
    lo, hi = float(np.min(u)), float(np.max(u))
    if hi > lo:
        vals = DARKEST + np.rint((u - lo) / (hi - lo) * (255 - DARKEST))
    else:
        vals = np.full(u.shape, MID_GRAY)
    img = np.zeros((mask.ny, mask.nx), dtype=np.uint8)
    img[mask.active] = vals.astype(np.uint8)
    return img[::-1]


def write_pgm(path, mask, u):
    img = heatmap_pixels(mask, u)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{mask.nx} {mask.ny}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def render_heatmap(field_path, out_path):
    mask, u = read_field(field_path)
    write_pgm(out_path, mask, u)
    return out_path
