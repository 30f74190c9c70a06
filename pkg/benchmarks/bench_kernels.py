"""Timing comparison of the compiled kernels against their Python source.

Run as a script:

    python3 benchmarks/bench_kernels.py [--repeat 5]

The compiled and uncompiled callables live side by side in
scfde.kernels (the njit wrapper vs the module-level function), so both
paths are timed in one process regardless of SCFDE_DISABLE_NUMBA. The
end-to-end block benchmark uses whichever backend the flag selected.
"""

import argparse
import timeit

import numpy as np

from scfde import kernels
from scfde.equalizer import ReceiverSpec
from scfde.numerics import RngStream, idft
from scfde.simulator import SweepConfig, run_block


def _levinson_setup(m=512, order=20):
    gen = RngStream(404, 0).generator()
    denom = 0.05 + gen.random(m)
    return idft(1.0 / denom), order


def _feedback_setup(m=512, taps=20):
    gen = RngStream(404, 1).generator()
    z_t = gen.standard_normal(m) + 1j * gen.standard_normal(m)
    fbf = 0.1 * (gen.standard_normal(taps) + 1j * gen.standard_normal(taps))
    points = (np.array([a + 1j * b for a in (-3, -1, 1, 3)
                        for b in (-3, -1, 1, 3)]) / np.sqrt(10))
    tail = points[gen.integers(0, 16, taps)]
    return z_t, fbf, tail, points


def _time(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    q, order = _levinson_setup()
    fb_args = _feedback_setup()

    # warm up so numba compilation is not timed
    kernels.levinson_recursion(q, order)
    kernels.dd_feedback(*fb_args, True)

    rows = []
    for name, fast, slow in (
        ("levinson order 20, M=512",
         lambda: kernels.levinson_recursion(q, order),
         lambda: kernels._levinson_recursion(q, order)),
        ("dd feedback M=512, L=20, 16 points",
         lambda: kernels.dd_feedback(*fb_args, True),
         lambda: kernels._dd_feedback(*fb_args, True)),
    ):
        t_fast = _time(fast, args.repeat, 50)
        t_slow = _time(slow, args.repeat, 5)
        rows.append((name, t_fast, t_slow))

    print(f"kernel backend: {kernels.backend()}")
    print(f"{'kernel':38s} {'active':>10s} {'python':>10s} {'speedup':>8s}")
    for name, t_fast, t_slow in rows:
        print(f"{name:38s} {1e6 * t_fast:8.1f}us {1e6 * t_slow:8.1f}us "
              f"{t_slow / t_fast:7.1f}x")

    cfg = SweepConfig.from_dict(dict(
        constellation="16qam", receivers="mmse-dfe", feedback="decision",
        nr=1, v=20, m=512, snr=[18.0], master_seed=2))
    spec = cfg.receiver_specs()[0]
    run_block(0, cfg, spec, 18.0)
    t_block = _time(lambda: run_block(1, cfg, spec, 18.0), args.repeat, 20)
    print(f"\nend-to-end block (16-QAM MMSE-DFE, decision feedback, M=512): "
          f"{1e3 * t_block:.2f} ms ({1 / t_block:.0f} blocks/s)")


if __name__ == "__main__":
    main()
