"""Command-line entry point: ``neumann-patterns <command> [options]``.

Exit codes: 0 success, 1 solver did not converge, 2 invalid input.
"""

import argparse
import logging
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import formats
from .analysis import analytic_constants, divergence_defect, epsilon_sweep, rigidity_check
from .domain import MaskError, build_mask, parse_shape
from .mountain_pass import TentSupportError, run_mountain_pass
from .newton import STRATEGIES, multistart, newton_solve
from .nonlinearity import NoPositiveRootError, check_monotone_sign, find_positive_root, parse_nonlinearity
from .spectral import neumann_eigenpairs, neumann_lambda2
from .variational import ProblemConfig

log = logging.getLogger("neumann_patterns")

EXIT_OK, EXIT_NOT_CONVERGED, EXIT_INVALID = 0, 1, 2


class InvalidInput(Exception):
    pass


def _length(text):
    """Accept ``0.0078125`` as well as ``1/128``."""
    try:
        value = float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _count(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return n


def _float_list(text):
    return [_length(t) for t in text.replace(",", " ").split()]


def read_config(path):
    """``key = value`` lines; ``#`` starts a comment.  Keys use flag names."""
    out = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                key, sep, value = line.partition("=")
                if not sep:
                    raise InvalidInput(f"{path}:{lineno}: expected 'key = value'")
                out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    except OSError as exc:
        raise InvalidInput(f"cannot read config: {exc}") from exc
    return out


def _problem_flags(p, eps_default=0.05, f_default="exp:delta=1", shape_default="disk"):
    p.add_argument("--f", default=f_default, help="nonlinearity, e.g. exp:delta=1, power:p=3, cubic")
    p.add_argument("--shape", default=shape_default, help="domain, e.g. disk:radius=1, lshape, rectangle:width=2")
    p.add_argument("--h", type=_length, default=1 / 64, help="cell size (1/64 or 0.015625)")
    p.add_argument("--eps", type=_length, default=eps_default, help="diffusion coefficient")


def _common_flags(p):
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--config", help="key = value file; command-line flags take precedence")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="neumann-patterns",
                                     description="Constant and pattern solutions of -eps Lap u = f(u) with zero flux.")
    sub = parser.add_subparsers(dest="command", required=True)
    cmds = {}

    p = sub.add_parser("solve", help="Newton from one initial field")
    _problem_flags(p)
    p.add_argument("--init", default="const:0.5",
                   help="const:<value>, random:<amplitude>, or a field dump path")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--maxit", type=int, default=60)
    cmds["solve"] = p

    p = sub.add_parser("multistart", help="Newton from n seeded initial fields")
    _problem_flags(p)
    p.add_argument("--n", type=_count, default=50)
    p.add_argument("--strategy", choices=STRATEGIES, default="random")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--maxit", type=int, default=60)
    cmds["multistart"] = p

    p = sub.add_parser("mpa", help="mountain-pass search for a nonconstant solution")
    _problem_flags(p, eps_default=0.01)
    p.add_argument("--path-points", type=_count, default=40)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--maxiter", type=_count, default=2000)
    cmds["mpa"] = p

    p = sub.add_parser("sweep", help="exploratory epsilon sweep (mountain pass + multistart census)")
    _problem_flags(p)
    p.add_argument("--eps-list", type=_float_list, default=[0.04, 0.02, 0.01])
    p.add_argument("--n", type=_count, default=20)
    p.add_argument("--strategy", choices=STRATEGIES, default="spikes")
    p.add_argument("--tol", type=float, default=1e-10)
    cmds["sweep"] = p

    p = sub.add_parser("eigen", help="lowest Neumann eigenvalues of the mask")
    p.add_argument("--shape", default="rectangle")
    p.add_argument("--h", type=_length, default=1 / 64)
    p.add_argument("--k", type=_count, default=4, help="number of nonzero eigenvalues")
    cmds["eigen"] = p

    p = sub.add_parser("verify", help="rigidity census: multistart plus the pairing identity")
    _problem_flags(p, f_default="cubic", shape_default="lshape")
    p.add_argument("--n", type=_count, default=50)
    p.add_argument("--strategy", choices=STRATEGIES, default="random")
    p.add_argument("--root", type=float, default=None,
                   help="zero of f used in the pairing; default: positive root if any, else 0")
    p.add_argument("--tol", type=float, default=1e-10)
    cmds["verify"] = p

    p = sub.add_parser("oracle", help="closed-form constants of the exponential family")
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--h", type=_length, default=1 / 64, help="cell size for the threshold table")
    cmds["oracle"] = p

    p = sub.add_parser("render", help="PGM heatmap of a field dump")
    p.add_argument("field", help="field dump path")
    p.add_argument("--output", help="image path (default: <field>.pgm)")
    cmds["render"] = p

    for p in cmds.values():
        _common_flags(p)
    return parser, cmds


def _parse(argv):
    parser, cmds = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        values = read_config(args.config)
        p = cmds[args.command]
        known = {a.dest for a in p._actions}
        bad = sorted(set(values) - known)
        if bad:
            raise InvalidInput(f"unknown config keys for {args.command}: {', '.join(bad)}")
        p.set_defaults(**values)
        args = parser.parse_args(argv)
    return args


def _config(args):
    shape, params = parse_shape(args.shape)
    mask = build_mask(shape, args.h, **params)
    return ProblemConfig(mask, parse_nonlinearity(args.f), args.eps)


def _out(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _print_table(reports):
    print(f"{'#':>3} {'conv':>5} {'class':>12} {'energy':>14} {'residual':>10} {'stability':>12} "
          f"{'min_u':>12} {'max_u':>12}")
    for i, r in enumerate(reports):
        print(f"{i:>3} {str(r.converged):>5} {r.classification:>12} {r.energy:>14.6g} {r.residual_norm:>10.3g} "
              f"{r.stability_index:>12.6g} {r.min_u:>12.6g} {r.max_u:>12.6g}")


def _initial(cfg, spec, seed):
    kind, _, value = spec.partition(":")
    if kind == "const":
        return cfg.mask.constant(float(value or 0.0))
    if kind == "random":
        rng = np.random.default_rng(seed)
        return float(value or 0.5) * rng.standard_normal(cfg.mask.n_cells)
    mask, u = formats.read_field(spec)
    if mask.n_cells != cfg.mask.n_cells or not np.array_equal(mask.active, cfg.mask.active):
        raise InvalidInput(f"field dump {spec} does not match the requested mask")
    return u


def cmd_solve(args):
    cfg = _config(args)
    rep = newton_solve(cfg, _initial(cfg, args.init, args.seed), tol=args.tol, maxit=args.maxit)
    formats.write_field(_out(args, "field.txt"), cfg.mask, rep.field)
    formats.write_results(_out(args, "results.csv"), [rep])
    _print_table([rep])
    if not rep.converged:
        print(f"not converged: {rep.message}")
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_multistart(args):
    cfg = _config(args)
    res = multistart(cfg, args.strategy, args.n, args.seed, tol=args.tol, maxit=args.maxit)
    formats.write_results(_out(args, "results.csv"), res.solutions)
    formats.write_results(_out(args, "runs.csv"), res.runs)
    for k, r in enumerate(res.solutions):
        formats.write_field(_out(args, f"solution_{k}.txt"), cfg.mask, r.field)
    _print_table(res.solutions)
    print(f"{res.n_converged}/{args.n} starts converged; {len(res.solutions)} distinct solutions")
    return EXIT_OK if res.n_converged else EXIT_NOT_CONVERGED


def cmd_mpa(args):
    cfg = _config(args)
    run = run_mountain_pass(cfg, path_points=args.path_points, tol=args.tol, seed=args.seed, maxiter=args.maxiter)
    rep = run.report
    formats.write_field(_out(args, "field.txt"), cfg.mask, rep.field)
    formats.write_trace(_out(args, "trace.csv"), run.trace)
    formats.write_results(_out(args, "results.csv"), [rep])
    _print_table([rep])
    area = cfg.mask.area()
    try:
        density = cfg.spec.F(find_positive_root(cfg.spec))
        upper = -float(density) * area
        inside = 0 < rep.energy < upper
        print(f"energy: 0 < E < K_xi*area: {formats.fmt(rep.energy)} in (0, {formats.fmt(upper)}): {inside}")
    except NoPositiveRootError:
        print(f"energy: {formats.fmt(rep.energy)}")
    if run.message:
        print(f"descent: {run.message}")
    if not rep.converged:
        print(f"not converged: {rep.message}")
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_sweep(args):
    cfg = _config(args)
    rows = epsilon_sweep(cfg, args.eps_list, args.n, args.seed, tol=args.tol, strategy=args.strategy)
    formats.write_sweep(_out(args, "sweep.csv"), rows)
    print("exploratory sweep; 'none found' means none found in the starts tried")
    print(f"{'epsilon':>10} {'c_epsilon':>14} {'distinct':>8} {'pattern':>8} {'ratio':>10}  note")
    for r in rows:
        print(f"{r.epsilon:>10.4g} {r.c_epsilon:>14.6g} {r.distinct_count:>8} {str(r.has_nonconstant):>8} "
              f"{r.threshold_ratio:>10.4g}  {r.note}")
    return EXIT_OK


def cmd_eigen(args):
    shape, params = parse_shape(args.shape)
    mask = build_mask(shape, args.h, **params)
    vals, _ = neumann_eigenpairs(mask, args.k)
    print(f"cells {mask.n_cells}, area {formats.fmt(mask.area())}")
    print("lambda_1 = 0 (constant mode)")
    for k, v in enumerate(vals, 2):
        print(f"lambda_{k} = {formats.fmt(v)}  (/pi^2 = {formats.fmt(v / math.pi ** 2)})")
    return EXIT_OK


def cmd_verify(args):
    cfg = _config(args)
    root = args.root
    if root is None:
        try:
            root = find_positive_root(cfg.spec)
        except NoPositiveRootError:
            root = 0.0
    res = multistart(cfg, args.strategy, args.n, args.seed, tol=args.tol)
    formats.write_results(_out(args, "results.csv"), res.solutions)
    lo = min([-10.0] + [r.min_u - 1 for r in res.solutions])
    hi = max([10.0] + [r.max_u + 1 for r in res.solutions])
    cond = check_monotone_sign(cfg.spec, root, (min(lo, root - 1), max(hi, root + 1)))
    print(f"sign condition f(t)(t - {formats.fmt(root)}) <= 0 sampled on [{lo:.3g}, {hi:.3g}]: "
          f"{'holds' if cond.holds else 'fails'} (worst {formats.fmt(cond.worst_value)} at t={formats.fmt(cond.worst_t)})")
    print(f"{'#':>3} {'class':>12} {'value':>14} {'dirichlet':>12} {'pairing':>12} {'gap':>12} {'divergence':>12}")
    for i, r in enumerate(res.solutions):
        rc = rigidity_check(cfg, r.field, root)
        div, _ = divergence_defect(cfg, r.field)
        print(f"{i:>3} {r.classification:>12} {r.constant_value:>14.6g} {rc.dirichlet_term:>12.3g} "
              f"{rc.pairing_term:>12.3g} {rc.gap:>12.3g} {div:>12.3g}")
    n_const = sum(r.classification == "constant" for r in res.solutions)
    print(f"{res.n_converged}/{args.n} starts converged; {len(res.solutions)} distinct solutions, "
          f"{n_const} constant")
    return EXIT_OK if res.n_converged else EXIT_NOT_CONVERGED


ORACLE_SHAPES = ("rectangle", "rectangle:width=2", "disk", "annulus", "lshape")


def cmd_oracle(args):
    c = analytic_constants(args.delta)
    rows = [("positive root xi", c.positive_root), ("root energy density K_xi", c.root_energy_density),
            ("f'(xi)", c.root_slope), ("quadratic coefficient A", c.quadratic_coeff),
            ("cubic coefficient B", c.cubic_coeff), ("bound argmax x*", c.bound_argmax),
            ("bound maximum C2", c.bound_max)]
    for name, v in rows:
        print(f"{name:<26} {formats.fmt(v)}")
    if math.isnan(c.root_slope):
        return EXIT_OK
    print(f"\nepsilon threshold f'(xi)/lambda2 (h = {formats.fmt(args.h)}):")
    for text in ORACLE_SHAPES:
        shape, params = parse_shape(text)
        lam2 = neumann_lambda2(build_mask(shape, args.h, **params)).lambda2
        print(f"  {text:<20} lambda2 {formats.fmt(lam2):>16}  threshold {formats.fmt(c.root_slope / lam2)}")
    return EXIT_OK


def cmd_render(args):
    out = args.output or os.path.splitext(args.field)[0] + ".pgm"
    formats.render_heatmap(args.field, out)
    print(out)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "multistart": cmd_multistart, "mpa": cmd_mpa, "sweep": cmd_sweep,
            "eigen": cmd_eigen, "verify": cmd_verify, "oracle": cmd_oracle, "render": cmd_render}


def run(argv=None):
    try:
        args = _parse(argv)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_INVALID if exc.code else EXIT_OK
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (InvalidInput, MaskError, TentSupportError, formats.FormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ArithmeticError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
