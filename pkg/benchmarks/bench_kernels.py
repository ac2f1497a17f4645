#!/usr/bin/env python3
"""Compiled vs pure-numpy timing for the multiplier kernel.

Two measurements:

* the scalar kernel alone, on inputs shaped like the 20 x 40 six-agent
  experiment (up to ~20 singular values per node);
* a full simulation, run in a child process with and without
  ``NETDR_DISABLE_NUMBA`` so the import-time switch takes effect.

Usage::

    python3 benchmarks/bench_kernels.py [--calls 20000] [--iters 500]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from netdr import _kernels

SIM_SNIPPET = """
import time
from netdr import _kernels
from netdr.central import solve_central
from netdr.datasplit import generate_data, preset_masks, split_from_masks
from netdr.prox import L1Norm
from netdr.simnet import simulate
from netdr.topology import random_walk_network
data = generate_data(20, 40, 0)
summands = split_from_masks(data, preset_masks("arbitrary-overlapping", 20, 40, 6, rng_seed=0))
net = random_walk_network(6, 0)
ref = solve_central(data, L1Norm(), 0.01)
simulate(net, summands, L1Norm(), 0.01, 0.02, 1.9, 5, ref)  # warm up / compile
t0 = time.perf_counter()
simulate(net, summands, L1Norm(), 0.01, 0.02, 1.9, {iters}, ref)
print(_kernels.USE_NUMBA, time.perf_counter() - t0)
"""


def make_inputs(count, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        k = int(rng.integers(3, 21))
        s2 = rng.uniform(0.1, 5, k) ** 2
        ghat2 = rng.standard_normal(k) ** 2
        out.append((s2, ghat2, float(rng.uniform(0, 1)), 1 / 3, 3.0, float(rng.uniform(1e-3, 0.1)), True))
    return out


def time_kernel(fn, inputs):
    for args in inputs[:10]:
        fn(*args)
    t0 = time.perf_counter()
    for args in inputs:
        fn(*args)
    return time.perf_counter() - t0


def time_simulation(iters, disable):
    env = dict(os.environ)
    if disable:
        env["NETDR_DISABLE_NUMBA"] = "1"
    else:
        env.pop("NETDR_DISABLE_NUMBA", None)
    out = subprocess.run([sys.executable, "-c", SIM_SNIPPET.format(iters=iters)],
                         env=env, capture_output=True, text=True, check=True)
    flag, secs = out.stdout.split()
    return flag == "True", float(secs)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--calls", type=int, default=20000)
    ap.add_argument("--iters", type=int, default=500)
    args = ap.parse_args(argv)

    inputs = make_inputs(args.calls)
    print(f"numba available: {_kernels.USE_NUMBA}")
    t_fast = time_kernel(_kernels.ball_multiplier, inputs)
    t_np = time_kernel(_kernels.ball_multiplier_numpy, inputs)
    print(f"kernel  {args.calls} calls  compiled {t_fast:.3f}s  numpy {t_np:.3f}s  "
          f"speedup {t_np / t_fast:.1f}x")

    # identical answers on both paths
    worst = max(abs(_kernels.ball_multiplier(*a)[0] - _kernels.ball_multiplier_numpy(*a)[0])
                / max(1.0, _kernels.ball_multiplier_numpy(*a)[0]) for a in inputs[:500])
    print(f"kernel  max relative multiplier difference {worst:.2e}")

    on, t_on = time_simulation(args.iters, disable=False)
    off, t_off = time_simulation(args.iters, disable=True)
    print(f"simulate {args.iters} rounds  numba={on} {t_on:.3f}s  numba={off} {t_off:.3f}s  "
          f"ratio {t_off / t_on:.2f}x")


if __name__ == "__main__":
    main()
