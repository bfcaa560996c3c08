"""Compare the compiled and pure-Python shooting kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from evanshock import backend
from evanshock.evans import EvansSystem
from evanshock.model import ShockParams
from evanshock.winding import build_contour


def time_kernel(fn, system, states, repeat):
    x0, hp, v, dv = system.profile.kernel_data()
    p = system.params
    vmin = float(np.nextafter(p.v_plus, 1.0))
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = []
        for st in states:
            yf = fn(tuple(st.r_minus), -system.L_minus, 0.0, st.lam, st.minus.mu, backend.FORWARD,
                    p.gamma, p.a, x0, hp, v, dv, vmin, system.atol, system.rtol)[0]
            ya = fn(tuple(st.l_plus), system.L_plus, 0.0, st.lam, st.plus.mu, backend.ADJOINT,
                    p.gamma, p.a, x0, hp, v, dv, vmin, system.atol, system.rtol)[0]
            out.append(sum(a * b for a, b in zip(yf, ya)))
        best = min(best, time.perf_counter() - t)
    return best, np.array(out)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--points", type=int, default=60)
    args = ap.parse_args()
    params = ShockParams(5.0 / 3.0, 1e-4)
    system = EvansSystem.build(params, 12.0)
    contour = build_contour(params.gamma, args.points)
    tracker = system.tracker()
    states = [tracker.seed(contour.radius)]
    for ta, tb in zip(contour.t[:-1], contour.t[1:]):
        states.append(tracker.advance(states[-1], contour.point(tb), path=contour.path(ta, tb)))

    print(f"{len(states)} Evans evaluations (gamma=5/3, v+=1e-4, L=12), best of {args.repeat}")
    t_py, d_py = time_kernel(backend.integrate_python, system, states, args.repeat)
    print(f"  python : {t_py:8.4f} s")
    if backend.BACKEND == "cython":
        t_c, d_c = time_kernel(backend.integrate, system, states, args.repeat)
        diff = np.max(np.abs(d_c - d_py) / np.abs(d_py))
        print(f"  cython : {t_c:8.4f} s   speedup {t_py / t_c:6.1f}x   max rel diff {diff:.2e}")
    else:
        print("  cython : not built")


if __name__ == "__main__":
    main()
