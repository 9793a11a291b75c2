"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py --repeat 3

Times the J_B quadrature on a difference grid and the midpoint matrix
assembly, and reports the largest disagreement between backends.
"""
import argparse
import math
import time

import numpy as np

from qeilab import kernels
from qeilab.quadrature import QuadratureConfig


def _best_of(fn, repeat):
    best = math.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_jb(mod, thetas, b, cfg, repeat):
    def run():
        vals, status = mod.jb_real_many(b.real, b.imag, thetas, cfg.relative_tolerance,
                                        cfg.absolute_tolerance, 1e-8, cfg.x_max_base,
                                        cfg.max_subdivisions)
        assert not np.any(status)
        return vals
    return _best_of(run, repeat)


def bench_jb_scalar(mod, thetas, b, cfg, repeat):
    def run():
        return np.array([complex(*mod.jb_real(b.real, b.imag, float(t), cfg.relative_tolerance,
                                              cfg.absolute_tolerance, 1e-8, cfg.x_max_base,
                                              cfg.max_subdivisions)[:2]) for t in thetas])
    return _best_of(run, repeat)


def bench_matrix(mod, n, repeat):
    theta = (np.arange(n) + 0.5 - 0.5 * n) * (20.0 / n)
    fp = np.cosh(0.5 * np.arange(n) * (20.0 / n))
    return _best_of(lambda: mod.midpoint_kernel(theta, fp, 0.1, 20.0 / n / (2 * math.pi)), repeat)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--points", type=int, default=500, help="J_B arguments per call")
    ap.add_argument("--N", type=int, default=1000, help="matrix size")
    ap.add_argument("--coupling", type=complex, default=1.3 + 0.4j)
    args = ap.parse_args(argv)

    fast = kernels.compiled_backend()
    slow = kernels.python_backend()
    if fast is None:
        print("compiled backend not built; run `pip install -e . --no-build-isolation` first")
        return 1
    cfg = QuadratureConfig()
    thetas = np.arange(args.points) * (20.0 / args.points)

    rows = []
    t_c, v_c = bench_jb(fast, thetas, args.coupling, cfg, args.repeat)
    t_p, v_p = bench_jb(slow, thetas, args.coupling, cfg, args.repeat)
    dev = float(np.max(np.abs(v_c - v_p) / np.maximum(np.abs(v_p), 1e-300)))
    rows.append((f"J_B x {args.points}", t_c, t_p, dev))

    small = thetas[thetas < 2.0]
    t_c, v_c = bench_jb_scalar(fast, small, args.coupling, cfg, args.repeat)
    t_p, v_p = bench_jb_scalar(slow, small, args.coupling, cfg, args.repeat)
    dev = float(np.max(np.abs(v_c - v_p) / np.maximum(np.abs(v_p), 1e-300)))
    rows.append((f"J_B scalar x {small.size}", t_c, t_p, dev))

    t_c, m_c = bench_matrix(fast, args.N, args.repeat)
    t_p, m_p = bench_matrix(slow, args.N, args.repeat)
    dev = float(np.max(np.abs(m_c - m_p)) / np.max(np.abs(m_p)))
    rows.append((f"midpoint N={args.N}", t_c, t_p, dev))

    print(f"{'kernel':<22}{'cython [s]':>12}{'python [s]':>12}{'speedup':>10}{'max rel dev':>14}")
    for name, tc, tp, d in rows:
        print(f"{name:<22}{tc:>12.4f}{tp:>12.4f}{tp / tc:>10.1f}{d:>14.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
