"""Compare the compiled and pure-Python im2col/col2im backends.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``. Each case times
one im2col and one col2im call on a batch shaped like a real layer input,
then a full conv forward+backward through the dispatching layer.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from tts_emg.nn import functional as F
from tts_emg.nn import kernels

# (label, batch, rows, cols, depth, filter rows, filter cols, stride rows, stride cols)
CASES = [
    ("db1 temporal 3x1", 128, 15, 10, 1, 3, 1, 1, 1),
    ("db1 spatial 3x10", 128, 15, 10, 64, 3, 10, 1, 1),
    ("db2 temporal 50x1/25", 128, 300, 12, 1, 50, 1, 25, 1),
    ("db2 spatial 3x12", 128, 12, 12, 64, 3, 12, 1, 1),
]


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_case(backend, case, repeat, rng):
    _, B, H, W, D, R, C, sr, sc = case
    spec = F.ConvSpec(R, C, 8, sr, sc)
    out_r, out_c = spec.output_shape(H, W)
    pt, pl = spec.padding(H, W)
    x = rng.standard_normal((B, H, W, D)).astype(np.float32)
    impl = kernels.BACKENDS[backend]
    im2col, col2im = impl.im2col, impl.col2im
    cols = im2col(x, R, C, sr, sc, pt, pl, out_r, out_c)
    t_im = _best(lambda: im2col(x, R, C, sr, sc, pt, pl, out_r, out_c), repeat)
    t_col = _best(lambda: col2im(cols, x.shape, R, C, sr, sc, pt, pl, out_r, out_c), repeat)
    return t_im, t_col


def bench_conv(backend, case, repeat, rng):
    _, B, H, W, D, R, C, sr, sc = case
    spec = F.ConvSpec(R, C, 32, sr, sc)
    x = rng.standard_normal((B, H, W, D)).astype(np.float32)
    w = (0.1 * rng.standard_normal((R, C, D, 32))).astype(np.float32)
    b = np.zeros(32, np.float32)
    previous = kernels.BACKEND
    kernels.use_backend(backend)
    try:
        def step():
            z = F.conv2d_forward(x, w, b, spec)
            F.conv2d_backward(np.ones_like(z), x, w, spec)
        return _best(step, repeat)
    finally:
        kernels.use_backend(previous)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    rng = np.random.default_rng(0)
    backends = sorted(kernels.BACKENDS)
    if "cython" not in backends:
        print("compiled backend not built; timing the pure-Python backend only")
    header = f"{'case':<24}{'backend':<9}{'im2col ms':>11}{'col2im ms':>11}{'conv f+b ms':>13}"
    print(header)
    print("-" * len(header))
    for case in CASES:
        rows = {}
        for backend in backends:
            t_im, t_col = bench_case(backend, case, args.repeat, rng)
            t_conv = bench_conv(backend, case, args.repeat, rng)
            rows[backend] = (t_im, t_col, t_conv)
            print(f"{case[0]:<24}{backend:<9}{1e3 * t_im:>11.2f}{1e3 * t_col:>11.2f}{1e3 * t_conv:>13.2f}")
        if len(rows) == 2:
            speed = [rows["python"][i] / rows["cython"][i] for i in range(3)]
            print(f"{'':<24}{'speedup':<9}{speed[0]:>10.1f}x{speed[1]:>10.1f}x{speed[2]:>12.1f}x")


if __name__ == "__main__":
    main()
