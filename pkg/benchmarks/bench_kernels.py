"""Time the numba and numpy backends of the hot kernels on disk masks.

    python benchmarks/bench_kernels.py [--h 1/128 1/256 1/512] [--repeat 20]

Also times one gradient evaluation (kernel + nonlinearity) through each
backend, and checks that the backends agree.
"""

import argparse
import time
from fractions import Fraction

import numpy as np

from neumann_patterns import _kernels
from neumann_patterns.domain import build_mask
from neumann_patterns.nonlinearity import exp_family
from neumann_patterns.variational import ProblemConfig, gradient


def best_of(fn, repeat):
    fn()  # warm-up (and numba compilation)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", nargs="+", default=["1/128", "1/256", "1/512"])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    backends = [b for b in (_kernels.numba_backend, _kernels.numpy_backend) if b is not None]
    rng = np.random.default_rng(0)
    print(f"{'h':>8} {'cells':>9} {'kernel':>10} " + " ".join(f"{b.name:>11}" for b in backends) + "   speedup")
    for text in args.h:
        mask = build_mask("disk", float(Fraction(text)))
        u = rng.standard_normal(mask.n_cells)
        cfg = ProblemConfig(mask, exp_family(1.0), 0.01)

        ref = _kernels.numpy_backend.laplacian(mask.neighbors, mask.faces, u)
        for b in backends:
            diff = np.max(np.abs(b.laplacian(mask.neighbors, mask.faces, u) - ref))
            assert diff <= 1e-12 * max(1.0, np.max(np.abs(ref))), (b.name, diff)

        rows = {
            "laplacian": lambda b: best_of(lambda: b.laplacian(mask.neighbors, mask.faces, u), args.repeat),
            "dirichlet": lambda b: best_of(lambda: b.dirichlet(mask.faces, u), args.repeat),
        }

        def grad_time(b):
            _kernels.backend = b
            try:
                return best_of(lambda: gradient(cfg, 0.1 * u), args.repeat)
            finally:
                _kernels.use_backend()

        rows["gradient"] = grad_time
        for name, timer in rows.items():
            ts = [timer(b) for b in backends]
            speed = f"{ts[-1] / ts[0]:8.2f}x" if len(ts) > 1 else ""
            print(f"{text:>8} {mask.n_cells:>9} {name:>10} " + " ".join(f"{t * 1e3:>9.3f}ms" for t in ts)
                  + f"  {speed}")


if __name__ == "__main__":
    main()
