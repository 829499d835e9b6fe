"""Compiled kernels vs numpy fallback, kernel by kernel and end to end.

    python benchmarks/bench_backends.py [--trials 20] [--preset ntru509 ...]

Prints median microseconds per call for each backend and the compiled speedup.
"""

import argparse
import statistics
import time

import numpy as np

from ntrubke import _backend
from ntrubke.bench import compare_backends, emit_table
from ntrubke.key_expansion import sample_expander
from ntrubke.poly_ring import (
    PAPER_PRESETS,
    RingElement,
    invert_mod_prime,
    preset,
    ring_mul,
    sample_ternary,
)


def median_us(fn, trials):
    fn()
    samples = []
    for _ in range(trials):
        start = time.perf_counter_ns()
        fn()
        samples.append((time.perf_counter_ns() - start) / 1e3)
    return statistics.median(samples)


def kernel_cases(params, rng):
    f = sample_ternary(params.weight_fg + 1, params.weight_fg, params, rng)
    dense = rng.integers(-params.q // 2, params.q // 2, params.N)
    e = sample_expander(params, "direct", rng).e
    h = RingElement(dense, params.q)
    return {
        "sparse x dense mod q": lambda: ring_mul(e, h, params, params.q),
        "ternary x dense mod q": lambda: ring_mul(f, h, params, params.q),
        "inverse mod p": lambda: invert_mod_prime(f, params),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--preset", action="append", choices=PAPER_PRESETS)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    rng = np.random.default_rng(args.seed)
    backends = _backend.available_backends()
    names = args.preset or list(PAPER_PRESETS)

    print(f"backends: {', '.join(backends)}")
    header = f"{'preset':<9} {'kernel':<22}" + "".join(f"{b + ' us':>14}" for b in backends)
    print(header + ("   compiled speedup" if len(backends) > 1 else ""))
    for name in names:
        params = preset(name)
        for label, fn in kernel_cases(params, rng).items():
            times = {}
            for b in backends:
                with _backend.use_backend(b):
                    times[b] = median_us(fn, args.trials)
            row = f"{name:<9} {label:<22}" + "".join(f"{times[b]:>14.1f}" for b in backends)
            if len(backends) > 1:
                row += f"   {times['python'] / times['compiled']:>8.1f}x"
            print(row)

    print()
    reports = [r for name in names for r in compare_backends(preset(name), max(args.trials, 10), rng)]
    print(emit_table(reports, "text").decode(), end="")
    for r in reports:
        print(f"# {r.preset} [{r.backend}] keygen/expansion {r.speedup_ratio:.1f}x")


if __name__ == "__main__":
    main()
