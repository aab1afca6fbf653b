"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--steps 100000] [--nodes 80 160] [--repeats 5]
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from vibrosim.fdm import simulate_fdm
from vibrosim.fem import simulate_fem
from vibrosim.params import SWEEP_REFERENCE


def _time(fn, repeats):
    samples = []
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples), result


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--nodes", type=int, nargs="+", default=[40, 80, 120])
    p.add_argument("--repeats", type=int, default=5)
    args = p.parse_args(argv)

    try:
        from vibrosim import _ckernels  # noqa: F401
    except ImportError:
        raise SystemExit("compiled extension not built; run `pip install -e .` first")

    print(f"{'solver':6} {'nodes':>5} {'cython ms':>10} {'python ms':>10} {'speedup':>8} {'max |diff|':>11}")
    for n in args.nodes:
        cfg = SWEEP_REFERENCE.replace(node_count=n, step_count=args.steps)
        if cfg.courant_number * np.sqrt(3.0) >= 1.0:
            cfg = cfg.replace(dt_s=0.5 * cfg.dx_m / cfg.wave_speed)
        for name, sim in (("fdm", simulate_fdm), ("fem", simulate_fem)):
            tc, hc = _time(lambda: sim(cfg, backend="cython"), args.repeats)
            tp, hp = _time(lambda: sim(cfg, backend="python"), args.repeats)
            diff = float(np.max(np.abs(hc.data - hp.data)))
            print(f"{name:6} {n:5d} {tc * 1e3:10.1f} {tp * 1e3:10.1f} {tp / tc:8.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
