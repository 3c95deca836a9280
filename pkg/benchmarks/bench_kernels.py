"""Compare the compiled and numpy simulation kernels.

Times the per-chunk kernel alone on pre-drawn lifetimes, and the end-to-end
``simulate`` call (sampling included), for a few representative plans.

    python benchmarks/bench_kernels.py --runs 200000 --repeat 3
"""
import argparse
import time

import numpy as np

from stragglers import simulator as sim
from stragglers.distributions import Pareto
from stragglers.plan import Mode, RedundancyPlan

PLANS = {
    "none k=100": RedundancyPlan(100),
    "replicate k=10 c=2": RedundancyPlan(10, Mode.REPLICATE, c=2),
    "code k=10 n=15": RedundancyPlan(10, Mode.CODE, n=15),
    "code k=50 n=60 relaunch": RedundancyPlan(50, Mode.CODE, n=60, delay=3.0, relaunch=True),
}


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_only(backend, plan, x, y):
    p = plan.canonical()
    runs = x.shape[0]
    out = [np.empty(runs), np.empty(runs), np.empty(runs), np.empty(runs, dtype=np.int64)]
    mode = {Mode.NONE: 0, Mode.REPLICATE: 1, Mode.CODE: 2}[p.mode]
    n = p.n if p.mode is Mode.CODE else p.k
    kern = sim._KERNELS[backend]
    return lambda: kern(x, y, mode, p.c, n, float(p.delay), bool(p.relaunch), *out)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    a = ap.parse_args(argv)
    backends = sim.available_backends()
    model = Pareto(1.0, 2.0)
    print(f"runs={a.runs} backends={','.join(backends)}")
    print(f"{'plan':<26}{'stage':<10}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, plan in PLANS.items():
        x, y = sim._draw(plan.canonical(), model, np.random.default_rng(a.seed), a.runs)
        for stage in ("kernel", "simulate"):
            t = {}
            for b in backends:
                if stage == "kernel":
                    t[b] = best_of(kernel_only(b, plan, x, y), a.repeat)
                else:
                    t[b] = best_of(lambda: sim.simulate(plan, model, a.runs, a.seed, backend=b), a.repeat)
            speed = t["python"] / t["cython"] if "cython" in t else float("nan")
            print(f"{name:<26}{stage:<10}" + "".join(f"{t[b]:>11.3f}s" for b in backends) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
