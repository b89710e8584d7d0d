"""Hot loops, each with a numba kernel and a pure-numpy twin.

The public names at the bottom dispatch on :data:`oligocat._accel.BACKEND`.
Both twins are importable (``*_numba`` / ``*_numpy``) so tests and the
benchmark can compare them directly. All arithmetic is int64; callers only
route sizes here whose values provably fit (Möbius values on partitions of
at most 9 points are bounded by 8!, subset sums by 2**40).
"""
from __future__ import annotations

import numpy as np

from ._accel import BACKEND, njit


# --------------------------------------------------------------------------
# Möbius column: mu(z, top) over a poset given by strict up-sets in CSR form.

def _moebius_column_py(indptr, indices, below, top):
    n = below.shape[0]
    out = np.zeros(n, dtype=np.int64)
    for z in range(n - 1, -1, -1):
        if not below[z]:
            continue
        if z == top:
            out[z] = 1
            continue
        s = 0
        for k in range(indptr[z], indptr[z + 1]):
            s += out[indices[k]]
        out[z] = -s
    return out


moebius_column_numba = njit(_moebius_column_py)


def moebius_column_numpy(indptr, indices, below, top):
    """Same recursion, vectorised one height level at a time."""
    n = below.shape[0]
    # height = longest chain upwards; elements of equal height are independent
    height = np.zeros(n, dtype=np.int64)
    for z in range(n - 1, -1, -1):
        seg = indices[indptr[z]:indptr[z + 1]]
        if seg.size:
            height[z] = height[seg].max() + 1
    out = np.zeros(n, dtype=np.int64)
    out[top] = 1
    todo = below.copy()
    todo[top] = False
    for h in range(1, int(height.max(initial=0)) + 1):
        level = np.nonzero((height == h) & todo)[0]
        if not level.size:
            continue
        csum = np.concatenate(([0], np.cumsum(out[indices])))
        sums = csum[indptr[level + 1]] - csum[indptr[level]]
        out[level] = -sums
    out[~below] = 0
    return out


# --------------------------------------------------------------------------
# Covering sums over a boolean lattice of orbits:
#   sum over E subset of {0..k-1} with OR_{i in E} tmask[i] == full of m^(k-|E|)
# This is Construction's Möbius sum for the trivial degree function, with m
# the Möbius value of a 2-chain.

def _cover_sum_py(tmask, full, m):
    k = tmask.shape[0]
    total = 0
    pw = np.empty(k + 1, dtype=np.int64)
    pw[0] = 1
    for i in range(1, k + 1):
        pw[i] = pw[i - 1] * m
    for sel in range(1, 1 << k):
        acc = 0
        cnt = 0
        s = sel
        i = 0
        while s:
            if s & 1:
                acc |= tmask[i]
                cnt += 1
            s >>= 1
            i += 1
        if acc == full:
            total += pw[k - cnt]
    return total


cover_sum_numba = njit(_cover_sum_py)


def cover_sum_numpy(tmask, full, m):
    k = tmask.shape[0]
    sel = np.arange(1, 1 << k, dtype=np.int64)
    acc = np.zeros(sel.shape, dtype=np.int64)
    cnt = np.zeros(sel.shape, dtype=np.int64)
    for i in range(k):
        on = (sel >> i) & 1
        acc |= np.where(on == 1, tmask[i], 0)
        cnt += on
    hit = acc == full
    return int(np.sum(np.power(np.int64(m), k - cnt[hit])))


def cover_sum_by_targets(counts, m) -> int:
    """The same sum grouped by which target orbits stay uncovered.

    With c_t source orbits over target t, inclusion-exclusion over the set S
    of uncovered targets gives sum_S (-1)^|S| m^(c_S) (1 + m)^(k - c_S).
    Cost is 2^(number of targets) instead of 2^(number of source orbits).
    """
    counts = [int(c) for c in counts]
    k = sum(counts)
    r = len(counts)
    total = 0
    for s in range(1 << r):
        c = 0
        bits = 0
        for t in range(r):
            if (s >> t) & 1:
                c += counts[t]
                bits += 1
        total += (-1) ** bits * m ** c * (1 + m) ** (k - c)
    return total


if BACKEND == "numba":
    moebius_column = moebius_column_numba
    cover_sum = cover_sum_numba
else:
    moebius_column = moebius_column_numpy
    cover_sum = cover_sum_numpy


# --------------------------------------------------------------------------
# Relation sets on a G-set with n <= 7 points. A relation R is an int64
# mask over n*n bits, bit a*n + b for the pair (a, b). For relations B, A, C
# let W be every triple (a, b, c) with (a,b) in B, (b,c) in A, (a,c) in C.
# "full" means W projects onto all of B, A and C. Any W' with those three
# projections sits inside this W, so the ternary closure condition only
# needs these maximal triples.

def _rows_py(r, n):
    rows = np.zeros(n, dtype=np.int64)
    cols = np.zeros(n, dtype=np.int64)
    for a in range(n):
        for b in range(n):
            if (r >> (a * n + b)) & 1:
                rows[a] |= 1 << b
                cols[b] |= 1 << a
    return rows, cols


def _compose13_py(rb, ca, n):
    # {(a, c) : some b with (a, b) in B and (b, c) in A}
    out = 0
    for a in range(n):
        for c in range(n):
            if rb[a] & ca[c]:
                out |= 1 << (a * n + c)
    return out


def _full_py(rb, cb, ra, ca, rc, cc, n):
    for a in range(n):
        for b in range(n):
            if (rb[a] >> b) & 1 and not (ra[b] & rc[a]):
                return False
    for b in range(n):
        for c in range(n):
            if (ra[b] >> c) & 1 and not (cb[b] & cc[c]):
                return False
    for a in range(n):
        for c in range(n):
            if (rc[a] >> c) & 1 and not (rb[a] & ca[c]):
                return False
    return True


def _member_py(sorted_members, x):
    lo, hi = 0, sorted_members.shape[0]
    while lo < hi:
        mid = (lo + hi) // 2
        if sorted_members[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo < sorted_members.shape[0] and sorted_members[lo] == x


def _jit_or_py(fn):
    j = njit(fn)
    return fn if j is None else j


_rows = _jit_or_py(_rows_py)
_compose13 = _jit_or_py(_compose13_py)
_full = _jit_or_py(_full_py)
_member = _jit_or_py(_member_py)



def _split(members, n):
    m = members.shape[0]
    rws = np.zeros((m, n), dtype=np.int64)
    cls = np.zeros((m, n), dtype=np.int64)
    for i in range(m):
        r, c = _rows(members[i], n)
        rws[i] = r
        cls[i] = c
    return rws, cls


_split_j = _jit_or_py(_split)


def _union_table(rows_a, n):
    # t[s] = union of the rows of A indexed by the bits of s
    t = np.zeros(1 << n, dtype=np.int64)
    for s in range(1, 1 << n):
        low = s & (-s)
        b = 0
        while (low >> b) != 1:
            b += 1
        t[s] = t[s ^ low] | rows_a[b]
    return t


_union_table_j = _jit_or_py(_union_table)


def _relset_closure(members, n, bitmap):
    # B o A has row a = union of A's rows over the bits of B's row a
    m = members.shape[0]
    rws, cls = _split_j(members, n)
    use_map = bitmap.shape[0] > 0
    for j in range(m):
        t = _union_table_j(rws[j], n)
        for i in range(m):
            comp = np.int64(0)
            for a in range(n):
                comp |= t[rws[i, a]] << (a * n)
            if use_map:
                if bitmap[comp] == 0:
                    return i, j
            elif not _member(members, comp):
                return i, j
    return -1, -1


def _relset_pairs(members, n, orbit_masks):
    m = members.shape[0]
    k = orbit_masks.shape[0]
    rws, cls = _split_j(members, n)
    sub = np.zeros(k, dtype=np.int64)
    tested = 0
    for i in range(m):
        for j in range(m):
            top = _compose13(rws[i], cls[j], n)
            cnt = 0
            for o in range(k):
                if orbit_masks[o] & ~top == 0:
                    sub[cnt] = orbit_masks[o]
                    cnt += 1
            for sel in range(1, 1 << cnt):
                cm = 0
                for o in range(cnt):
                    if (sel >> o) & 1:
                        cm |= sub[o]
                rc, cc = _rows(cm, n)
                tested += 1
                if _full(rws[i], cls[i], rws[j], cls[j], rc, cc, n) and not _member(members, cm):
                    return i, j, cm, tested
    return -1, -1, 0, tested


def _relset_cands(members, n, candidates):
    m = members.shape[0]
    rws, cls = _split_j(members, n)
    tested = 0
    for t in range(candidates.shape[0]):
        rc, cc = _rows(candidates[t], n)
        for i in range(m):
            for j in range(m):
                tested += 1
                if _full(rws[i], cls[i], rws[j], cls[j], rc, cc, n):
                    return i, j, candidates[t], tested
    return -1, -1, 0, tested


_relset_closure_j = njit(_relset_closure)


def relset_closure_numba(members, n):
    if n * n <= 25:
        bitmap = np.zeros(1 << (n * n), dtype=np.uint8)
        bitmap[members] = 1
    else:
        bitmap = np.zeros(0, dtype=np.uint8)
    return _relset_closure_j(members, n, bitmap)
relset_pairs_numba = njit(_relset_pairs)
relset_cands_numba = njit(_relset_cands)


def _bool_rel(masks, n):
    bits = (masks[:, None] >> np.arange(n * n, dtype=np.int64)) & 1
    return bits.reshape(-1, n, n).astype(np.int64)


def _to_mask(rel, n):
    w = (np.int64(1) << np.arange(n * n, dtype=np.int64))
    return (rel.reshape(rel.shape[0], n * n) * w).sum(axis=1)


def relset_closure_numpy(members, n):
    m = members.shape[0]
    rows = ((members[:, None] >> (np.arange(n, dtype=np.int64) * n)[None, :]) & ((1 << n) - 1))
    tables = np.zeros((m, 1 << n), dtype=np.int64)
    for s in range(1, 1 << n):
        low = s & -s
        tables[:, s] = tables[:, s ^ low] | rows[:, low.bit_length() - 1]
    sorted_m = np.sort(members)
    for i in range(m):
        comp = np.zeros(m, dtype=np.int64)
        for a in range(n):
            comp |= tables[:, rows[i, a]] << (a * n)
        pos = np.minimum(np.searchsorted(sorted_m, comp), m - 1)
        bad = sorted_m[pos] != comp
        if bad.any():
            return i, int(np.argmax(bad))
    return -1, -1


def _full_numpy(b, a, c):
    """full(B, A, C) for one B, A and a stack of C (shape m x n x n)."""
    # W[t, a, b, c] = B[a,b] A[b,c] C[t,a,c]
    w = b[None, :, :, None] * a[None, None, :, :] * c[:, :, None, :]
    p12 = w.max(axis=3) if w.shape[3] else w.sum(axis=3)
    p23 = w.max(axis=1) if w.shape[1] else w.sum(axis=1)
    p13 = w.max(axis=2) if w.shape[2] else w.sum(axis=2)
    return (np.all(p12 == b[None], axis=(1, 2)) & np.all(p23 == a[None], axis=(1, 2))
            & np.all(p13 == c, axis=(1, 2)))


def relset_pairs_numpy(members, n, orbit_masks):
    rel = _bool_rel(members, n)
    tested = 0
    for i in range(rel.shape[0]):
        for j in range(rel.shape[0]):
            top = int(_to_mask((np.matmul(rel[i], rel[j]) > 0).astype(np.int64)[None], n)[0])
            sub = [int(o) for o in orbit_masks if int(o) & ~top == 0]
            if not sub:
                continue
            sels = np.arange(1, 1 << len(sub), dtype=np.int64)
            cm = np.zeros(sels.shape, dtype=np.int64)
            for o, om in enumerate(sub):
                cm |= np.where((sels >> o) & 1 == 1, om, 0)
            tested += cm.size
            ok = _full_numpy(rel[i], rel[j], _bool_rel(cm, n)) & ~np.isin(cm, members)
            if ok.any():
                return i, j, int(cm[np.argmax(ok)]), tested
    return -1, -1, 0, tested


def relset_cands_numpy(members, n, candidates):
    rel = _bool_rel(members, n)
    crel = _bool_rel(candidates, n)
    tested = 0
    for i in range(rel.shape[0]):
        for j in range(rel.shape[0]):
            tested += crel.shape[0]
            ok = _full_numpy(rel[i], rel[j], crel)
            if ok.any():
                return i, j, int(candidates[np.argmax(ok)]), tested
    return -1, -1, 0, tested


if BACKEND == "numba":
    relset_closure = relset_closure_numba
    relset_pairs = relset_pairs_numba
    relset_cands = relset_cands_numba
else:
    relset_closure = relset_closure_numpy
    relset_pairs = relset_pairs_numpy
    relset_cands = relset_cands_numpy


# --------------------------------------------------------------------------
# Functor check on G-sets. For a fixed relation b (a set of Z x Y orbits)
# enumerate every non-empty D inside Z x Y x X with p12(D) inside b: one
# (possibly empty) set of triple orbits above each orbit of b. Each D adds its weight to
# R[p23(D), p13(D)], where the weight is looked up by the histogram of
# D-orbit counts over the orbits of p13(D). A subset-sum over the p23 index
# then gives R[A, C] = sum over D with p23(D) inside A.

def _phi_toggle(o, sgn, o23, o13, cnt23, cnt13, st, pw):
    y = o23[o]
    t = o13[o]
    c = cnt13[t]
    if sgn > 0:
        if cnt23[y] == 0:
            st[0] |= np.int64(1) << y
        cnt23[y] += 1
        if c > 0:
            st[2] -= pw[c - 1]
        else:
            st[1] |= np.int64(1) << t
        st[2] += pw[c]
        cnt13[t] = c + 1
    else:
        cnt23[y] -= 1
        if cnt23[y] == 0:
            st[0] &= ~(np.int64(1) << y)
        st[2] -= pw[c - 1]
        if c > 1:
            st[2] += pw[c - 2]
        else:
            st[1] &= ~(np.int64(1) << t)
        cnt13[t] = c - 1


_phi_toggle_j = _jit_or_py(_phi_toggle)


def _subset_zeta_rows(r, nbits):
    for bit in range(nbits):
        step = 1 << bit
        for jm in range(r.shape[0]):
            if jm & step:
                for k in range(r.shape[1]):
                    r[jm, k] += r[jm ^ step, k]


_subset_zeta_rows_j = _jit_or_py(_subset_zeta_rows)


def _phi_accumulate(b_orbits, above_ptr, above_idx, o23, o13, n23, n13, pw, wtable):
    m = b_orbits.shape[0]
    r = np.zeros((1 << n23, 1 << n13), dtype=np.int64)
    cnt23 = np.zeros(n23, dtype=np.int64)
    cnt13 = np.zeros(n13, dtype=np.int64)
    st = np.zeros(3, dtype=np.int64)
    # reflected mixed-radix Gray code: digit t walks 0..2^c-1 and back, and
    # its subset is gray(pos) = pos ^ (pos >> 1), so each step flips one orbit
    pos = np.zeros(m, dtype=np.int64)
    direction = np.ones(m, dtype=np.int64)
    lim = np.zeros(m, dtype=np.int64)
    for t in range(m):
        zy = b_orbits[t]
        lim[t] = (np.int64(1) << (above_ptr[zy + 1] - above_ptr[zy])) - 1
    while True:
        # the empty D lands on code 0, whose weight is 0
        r[st[0], st[1]] += wtable[st[2]]
        t = 0
        while t < m:
            nxt = pos[t] + direction[t]
            if 0 <= nxt <= lim[t]:
                break
            direction[t] = -direction[t]
            t += 1
        if t == m:
            break
        old = pos[t] ^ (pos[t] >> 1)
        new = nxt ^ (nxt >> 1)
        pos[t] = nxt
        flip = old ^ new
        q = 0
        while flip > 1:
            flip >>= 1
            q += 1
        sgn = 1 if new > old else -1
        _phi_toggle_j(above_idx[above_ptr[b_orbits[t]] + q], sgn, o23, o13, cnt23, cnt13, st, pw)
    _subset_zeta_rows_j(r, n23)
    return r


phi_accumulate_numba = njit(_phi_accumulate)


def phi_accumulate_numpy(b_orbits, above_ptr, above_idx, o23, o13, n23, n13, pw, wtable,
                         chunk=1 << 16):
    """Same table, enumerating all subsets of the triple orbits above b in chunks."""
    groups = [above_idx[above_ptr[zy]:above_ptr[zy + 1]] for zy in b_orbits]
    orbs = np.concatenate(groups) if groups else np.zeros(0, dtype=np.int64)
    n = orbs.shape[0]
    r = np.zeros((1 << n23, 1 << n13), dtype=np.int64)
    on23 = np.zeros((n, n23), dtype=np.int64)
    on23[np.arange(n), o23[orbs]] = 1
    on13 = np.zeros((n, n13), dtype=np.int64)
    on13[np.arange(n), o13[orbs]] = 1
    w23 = np.int64(1) << np.arange(n23, dtype=np.int64)
    w13 = np.int64(1) << np.arange(n13, dtype=np.int64)
    pwz = np.concatenate(([0], pw))
    for start in range(1, 1 << n, chunk):
        sels = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        bits = (sels[:, None] >> np.arange(n, dtype=np.int64)) & 1
        j = ((bits @ on23) > 0).astype(np.int64) @ w23
        cnt = bits @ on13
        k = (cnt > 0).astype(np.int64) @ w13
        code = pwz[cnt].sum(axis=1)
        np.add.at(r, (j, k), wtable[code])
    rows = np.arange(r.shape[0])
    for bit in range(n23):
        hi = rows[(rows >> bit) & 1 == 1]
        r[hi] += r[hi ^ (1 << bit)]
    return r


phi_accumulate = phi_accumulate_numba if BACKEND == "numba" else phi_accumulate_numpy
