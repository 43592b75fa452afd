"""Time the numba kernels against the numpy fallback and check they agree.

Usage: python3 benchmarks/bench_kernels.py [--norb 8] [--nelec 6] [--repeat 3]
"""
import argparse
import time

import numpy as np

from papt import _kernels
from papt._backend import HAVE_NUMBA
from papt.detci import DetSpace
from papt.mbpt import DEFAULT_MAX_DETS
from papt.fcidump import SpinOrbitalView
from papt.models import random_molecular


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--norb", type=int, default=8)
    ap.add_argument("--nelec", type=int, default=6)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    s = random_molecular(args.norb, args.nelec, seed=0)
    d = DetSpace(args.norb, args.nelec // 2, args.nelec - args.nelec // 2)
    if len(d) > DEFAULT_MAX_DETS:
        ap.error(f"{len(d)} determinants; dense matrices are capped at {DEFAULT_MAX_DETS}")
    v = SpinOrbitalView(s)
    h, eri = v.h_so(), v.tensor()
    order = np.argsort(d.keys)
    table_args = (d.keys, d.keys[order], order, d.nso)
    print(f"norb={args.norb} nelec={args.nelec} determinants={len(d)} numba={'yes' if HAVE_NUMBA else 'no'}")

    # first calls compile (or load the on-disk cache)
    t0 = time.perf_counter()
    _kernels.slater_condon_nb(d.keys[:2], h, eri, 0.0)
    _kernels.single_table_nb(*table_args)
    print(f"numba warm-up: {time.perf_counter() - t0:.2f} s")

    t_nb, m_nb = best_of(lambda: _kernels.slater_condon_nb(d.keys, h, eri, s.core_energy), args.repeat)
    t_np, m_np = best_of(lambda: _kernels.slater_condon_np(d.keys, h, eri, s.core_energy), args.repeat)
    print(f"slater_condon  numba {t_nb:8.4f} s  numpy {t_np:8.4f} s  speedup {t_np / t_nb:6.1f}x  "
          f"max |diff| {np.max(np.abs(m_nb - m_np)):.1e}")

    t_nb, a = best_of(lambda: _kernels.single_table_nb(*table_args), args.repeat)
    t_np, b = best_of(lambda: _kernels.single_table_np(*table_args), args.repeat)
    a, b = np.array(a), np.array(b)
    same = a.shape == b.shape and np.array_equal(a[:, np.lexsort(a[:4])], b[:, np.lexsort(b[:4])])
    print(f"single_table   numba {t_nb:8.4f} s  numpy {t_np:8.4f} s  speedup {t_np / t_nb:6.1f}x  "
          f"identical {same}")


if __name__ == "__main__":
    main()
