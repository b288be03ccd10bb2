"""Compiled loops vs the numpy fallback on the hot kernels.

Run: python3 benchmarks/bench_kernels.py [--repeat 5]
Both variants are imported side by side, so LORENTZMAX_NO_JIT does not matter here.
"""
import argparse
import time

import numpy as np

from lorentzmax import kernels
from lorentzmax.generators import gen_first_type, gen_second_type, synth_second_type
from lorentzmax.maximal import dense_ball_order, tables_for
from lorentzmax.space import cell_weights_float, realize_dense


def best_of(fn, repeat):
    fn()  # warm up (compiles the jit variant)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases(rng):
    dense = realize_dense(gen_first_type([1, 2, 4, 8]))
    order, is_end = dense_ball_order(dense)
    w = cell_weights_float(dense)
    N = len(w)
    F = rng.uniform(0.0, 1.0, (256, N))
    yield "dense_maximal", (order, is_end, w, F)

    small = realize_dense(gen_first_type([1, 2, 4]))
    o2, e2 = dense_ball_order(small)
    w2 = cell_weights_float(small)
    masks = np.arange(1, 1 << len(w2), dtype=np.int64)
    yield "dense_subset_ratios", (o2, e2, w2, 2.0, 2.0, masks)

    V = np.sort(rng.uniform(0.0, 1.0, (2048, 64)), axis=1)[:, ::-1].copy()
    Wt = rng.uniform(0.1, 1.0, (2048, 64))
    yield "lorentz_batch", (V, Wt, 2.0, 1.5)

    tab = tables_for(gen_second_type(synth_second_type(2, 2, 2, 4)))
    fm = rng.uniform(1.0, 2.0, (512, tab.C))
    fe = rng.integers(-40, 0, (512, tab.C)).astype(np.int64)
    args = (fm, fe, tab.glob_m, tab.glob_e, tab.cell_ptr, tab.ball_full, tab.ent_ptr, tab.ent_cell,
            tab.ent_m, tab.ent_e, tab.den_m, tab.den_e)
    yield "xr_ball_max", args


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<22}{'jit [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}{'max rel diff':>14}")
    for name, inp in cases(rng):
        fj = getattr(kernels, name + "_jit")
        fn = getattr(kernels, name + "_np")
        tj = best_of(lambda: fj(*inp), args.repeat)
        tn = best_of(lambda: fn(*inp), args.repeat)
        a, b = fj(*inp), fn(*inp)
        if isinstance(a, tuple):  # extended range: compare mantissa * 2^exponent
            a = np.ldexp(a[0], a[1].astype(np.int32))
            b = np.ldexp(b[0], b[1].astype(np.int32))
        diff = float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
        print(f"{name:<22}{tj * 1e3:>12.3f}{tn * 1e3:>12.3f}{tn / tj:>10.1f}{diff:>14.2e}")


if __name__ == "__main__":
    main()
