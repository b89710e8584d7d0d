"""Time the numba kernels against their numpy fallbacks on random inputs.

    python3 benchmarks/bench_kernels.py [--repeat N] [--seed S]

Results are checked for agreement before timing (for witness searches,
only whether a witness was found). The first numba call pays
for compilation, so every kernel is warmed up once.
"""
import argparse
import timeit

import numpy as np

from oligocat import _accel, kernels


def moebius_instance(rng, n=3000, fanout=6):
    # a random poset on 0..n-1 given by up-sets pointing to larger indices
    ups = []
    for z in range(n):
        k = min(fanout, n - z - 1)
        ups.append(np.sort(rng.choice(np.arange(z + 1, n), size=k, replace=False)) if k else np.array([], int))
    indptr = np.concatenate(([0], np.cumsum([len(u) for u in ups]))).astype(np.int64)
    indices = np.concatenate(ups).astype(np.int64)
    below = np.ones(n, dtype=np.bool_)
    return indptr, indices, below, np.int64(n - 1)


def cover_instance(rng, k=16, targets=8):
    tmask = np.array([1 << int(t) for t in rng.integers(0, targets, size=k)], dtype=np.int64)
    full = int(np.bitwise_or.reduce(tmask))
    return tmask, np.int64(full), np.int64(3)


def relset_instance(rng, n=3, size=40):
    members = np.unique(rng.integers(1, 1 << (n * n), size=size)).astype(np.int64)
    return members, n


def phi_instance(rng, n_zy=4, per=4, n23=4, n13=4):
    total = n_zy * per
    above_ptr = np.arange(0, total + 1, per, dtype=np.int64)
    above_idx = rng.permutation(total).astype(np.int64)
    o23 = rng.integers(0, n23, size=total).astype(np.int64)
    o13 = rng.integers(0, n13, size=total).astype(np.int64)
    b_orbits = np.arange(n_zy, dtype=np.int64)
    cmax = int(np.bincount(o13, minlength=n13).max())
    base = n13 + 1
    pw = np.array([base ** c for c in range(cmax)], dtype=np.int64)
    wtable = rng.integers(-4, 5, size=base ** cmax).astype(np.int64)
    wtable[0] = 0
    return b_orbits, above_ptr, above_idx, o23, o13, n23, n13, pw, wtable


def same(a, b):
    if isinstance(a, tuple) and len(a) in (2, 4):
        # witness searches may stop at different valid witnesses; compare found-ness
        return (a[0] >= 0) == (b[0] >= 0)
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return 0
    rng = np.random.default_rng(args.seed)
    rel = relset_instance(rng)
    n = rel[1]
    cases = [
        ("moebius_column", kernels.moebius_column_numba, kernels.moebius_column_numpy, moebius_instance(rng)),
        ("cover_sum", kernels.cover_sum_numba, kernels.cover_sum_numpy, cover_instance(rng)),
        ("relset_closure", kernels.relset_closure_numba, kernels.relset_closure_numpy, rel),
        ("relset_pairs", kernels.relset_pairs_numba, kernels.relset_pairs_numpy,
         rel + (np.array([1 << p for p in range(n * n)], dtype=np.int64),)),
        ("relset_cands", kernels.relset_cands_numba, kernels.relset_cands_numpy,
         rel + (np.arange(1, 1 << (n * n), 7, dtype=np.int64),)),
        ("phi_accumulate", kernels.phi_accumulate_numba, kernels.phi_accumulate_numpy, phi_instance(rng)),
    ]
    print(f"{'kernel':<16}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}  agree")
    for name, fast, slow, inst in cases:
        agree = same(fast(*inst), slow(*inst))  # also warms up the jit
        tf = min(timeit.repeat(lambda: fast(*inst), number=1, repeat=args.repeat)) * 1e3
        ts = min(timeit.repeat(lambda: slow(*inst), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<16}{tf:>12.3f}{ts:>12.3f}{ts / max(tf, 1e-9):>9.1f}x  {agree}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
