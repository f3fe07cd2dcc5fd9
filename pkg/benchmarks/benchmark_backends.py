"""Benchmark the numba kernels against the pure-numpy fallback.

Times one relaxation block (moments + coupling weight + upwind rhs + Euler
update per step) on a few grid sizes, with a warmup pass so JIT
compilation does not pollute the numba numbers.

Usage: python benchmarks/benchmark_backends.py [steps]
"""

import sys
import time

import numpy as np

import grainkin as gk
from grainkin.backends import numpy_impl
from grainkin.model import stencil_for

try:
    from grainkin.backends import numba_impl
except ImportError:
    numba_impl = None


def time_block(impl, params, steps):
    grid = gk.Grid.from_parameters(params)
    state = gk.initial_state(params, grid, "random")
    st = stencil_for(params)
    dt = gk.stable_dt(params)
    g = state.g.copy()
    buf = np.zeros_like(g)
    args = (st.xi, st.sign, st.cp, st.cm, st.kd, st.jup, st.jlo, st.kappa,
            st.wsix, st.numw, st.nsix, st.eps, params.area_target, dt, 0.0, steps)
    impl.run_block(g.copy(), buf, *args[:-1], 5)     # warmup / JIT
    t0 = time.perf_counter()
    done, code, resid, gam, *_ = impl.run_block(g, buf, *args)
    wall = time.perf_counter() - t0
    assert done == steps and code == 0
    return wall, gam


def main():
    steps = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
    cases = [
        ("N=15 K=200", gk.Parameters(beta=1.0, n_max=15, domain_length=10, cells=200)),
        ("N=25 K=400", gk.Parameters(beta=1.0, n_max=25, domain_length=20, cells=400)),
        ("N=25 K=800", gk.Parameters(beta=1.0, n_max=25, domain_length=20, cells=800)),
    ]
    print(f"{steps} Euler steps per case")
    print(f"{'case':<12} {'backend':<8} {'total [s]':>10} {'per step [us]':>14} {'speedup':>8}")
    for label, params in cases:
        t_np, g_np = time_block(numpy_impl, params, steps)
        row = f"{label:<12} {'numpy':<8} {t_np:>10.3f} {1e6 * t_np / steps:>14.1f} {'1.0x':>8}"
        print(row)
        if numba_impl is not None:
            t_nb, g_nb = time_block(numba_impl, params, steps)
            assert abs(g_nb - g_np) <= 1e-10 * abs(g_np)
            print(f"{'':<12} {'numba':<8} {t_nb:>10.3f} {1e6 * t_nb / steps:>14.1f} "
                  f"{t_np / t_nb:>7.1f}x")
        else:
            print(f"{'':<12} {'numba':<8} {'unavailable':>10}")


if __name__ == "__main__":
    main()
