"""Benchmark: jitted event-loop kernel vs the pure-Python fallback.

Runs the same replication through both paths and reports events/second.
The fallback is selected the same way the package selects it at runtime
(AOIQ_NO_NUMBA=1), so this measures exactly what users of either path get.

    python3 benchmarks/bench_kernel.py [--horizon 1e6] [--repeat 3]
"""

import argparse
import os
import time

import numpy as np

from aoiq._kernel import _core_impl, _core_jit
from aoiq.analytic import SystemParams
from aoiq.distributions import exponential
from aoiq.simulator import SimConfig, replication_rng


def one_pass(core, config, rep=0):
    params = config.params
    m = params.m
    rng = replication_rng(config.seed, rep, config.replications)
    ia = config.resolved_interarrival().kernel_params()
    sv = params.service.kernel_params()
    trans = np.zeros((m, m), dtype=np.int64)
    k_counts = np.zeros(m, dtype=np.int64)
    scratch = [np.zeros(m) for _ in range(5)]
    log_buf = np.zeros((1, 4))
    t0 = time.perf_counter()
    out = core(rng, m, config.horizon, config.resolved_warmup(),
               ia[0], ia[1], ia[2], sv[0], sv[1], sv[2],
               trans, k_counts, *scratch, log_buf, 0)
    elapsed = time.perf_counter() - t0
    status, meas_start, integral = out[0], out[1], out[2]
    departures, arrivals = out[4], out[5]
    events = departures + arrivals
    return elapsed, events, integral / (config.horizon - meas_start)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--horizon", type=float, default=1e6)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    config = SimConfig(
        params=SystemParams(lam=1.0, m=3, service=exponential(1.0)),
        horizon=args.horizon, replications=1, seed=42,
    )

    if _core_jit is None:
        print("numba is not installed; only the pure path is available")
        paths = [("pure", _core_impl)]
    else:
        _ = one_pass(_core_jit, config)  # compile before timing
        paths = [("jit", _core_jit), ("pure", _core_impl)]

    results = {}
    for name, core in paths:
        best = None
        for _ in range(args.repeat):
            elapsed, events, mean = one_pass(core, config)
            if best is None or elapsed < best[0]:
                best = (elapsed, events, mean)
        elapsed, events, mean = best
        results[name] = elapsed
        print(f"{name:>4}: {elapsed:8.3f}s  {events / elapsed / 1e6:8.2f} M events/s"
              f"  (mean AoI {mean:.6f}, {events} events)")

    if len(results) == 2:
        print(f"speedup: {results['pure'] / results['jit']:.1f}x")


if __name__ == "__main__":
    main()
