"""Benchmark the compiled kernel extension against the numpy fallback.

Usage:  python benchmarks/bench_kernels.py [--batch 2000] [--repeats 200]

Times the atom-batch reduction (value, trace, divergence matrix) that
dominates every field evaluation, for several dimensions and batch sizes,
then reports the speedup of the compiled path and the max discrepancy.
"""

import argparse
import time

import numpy as np

from spherecalib import _kernels_py
from spherecalib.fields import a_coeffs

try:
    from spherecalib import _kernels as _compiled
except ImportError:
    _compiled = None


def make_batch(rng, m, d):
    q = rng.standard_normal(d)
    q /= np.linalg.norm(q)
    centers = rng.standard_normal((m, d))
    centers /= np.linalg.norm(centers, axis=1)[:, None]
    centers = centers[np.abs(centers @ q) < 0.999]
    weights = rng.uniform(-1.0, 1.0, len(centers))
    kinds = rng.integers(0, 2, len(centers)).astype(np.int8)
    return q, centers, weights, kinds


def time_backend(fn, batch, k, a, repeats):
    fn(*batch, k, a)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*batch, k, a)
    return (time.perf_counter() - t0) / repeats


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--batch", type=int, default=2000)
    ap.add_argument("--repeats", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if _compiled is None:
        print("compiled extension not available; nothing to compare")
        return

    rng = np.random.default_rng(args.seed)
    print(f"{'k':>3} {'atoms':>6} {'python':>12} {'compiled':>12} "
          f"{'speedup':>8} {'max diff':>10}")
    for k in (2, 4, 6, 8):
        a = a_coeffs(k // 2)
        for m in (50, args.batch):
            batch = make_batch(rng, m, k + 2)
            t_py = time_backend(_kernels_py.accumulate, batch, k, a, args.repeats)
            t_c = time_backend(_compiled.accumulate, batch, k, a, args.repeats)
            f_p, tr_p, m_p = _kernels_py.accumulate(*batch, k, a)
            f_c, tr_c, m_c = _compiled.accumulate(*batch, k, a)
            diff = max(
                float(np.max(np.abs(f_p - f_c))),
                abs(tr_p - tr_c),
                float(np.max(np.abs(m_p - m_c))),
            )
            print(f"{k:>3} {len(batch[1]):>6} {t_py * 1e6:>10.1f}us "
                  f"{t_c * 1e6:>10.1f}us {t_py / t_c:>7.2f}x {diff:>10.2e}")


if __name__ == "__main__":
    main()
