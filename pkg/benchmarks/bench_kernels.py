"""Compare the compiled and numpy kernels on Armijo descent and enclosing balls.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import timeit

import numpy as np

from optrec import _backend
from optrec.losses import LossProblem, LossSpec
from optrec.measurements import DataSample, nested_sites
from optrec.modelclass import SobolevBall
from optrec.optimize import schedule_parameters
from optrec.splinespace import make_uniform_space, quarter_sqrt


def descent_case(m):
    x = nested_sites([m], 0xDEC0DE)[0]
    n, mu, _ = schedule_parameters(m, 1.5)
    problem = LossProblem(DataSample(x, quarter_sqrt()(x)), make_uniform_space(n), LossSpec.powered(mu, SobolevBall(1.5)))
    c0 = np.zeros(problem.space.dim)

    def run(kern, iters=2000):
        return kern.sobolev_descent(c0, problem.prob, iters, 1e-12, 1e-4, 0.5, 1.0, 0.0, False)

    return run


def meb_case(k):
    P = np.random.default_rng(k).standard_normal((k, 2))

    def run(kern):
        return kern.meb(P)

    return run


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    kernels = {name: _backend.load(name) for name in _backend.available()}
    cases = [(f"descent m={m} (2000 iters)", descent_case(m)) for m in (40, 160)]
    cases += [(f"meb k={k}", meb_case(k)) for k in (1_000, 100_000)]
    names = list(kernels)
    print(f"{'case':<28}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, run in cases:
        times = []
        for name in names:
            kern = kernels[name]
            run(kern)
            times.append(min(timeit.repeat(lambda: run(kern), number=1, repeat=args.repeat)))
        row = f"{label:<28}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) > 1:
            row += f"{times[-1] / times[0]:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
