"""numba kernels against their numpy twins and plain-Python oracles."""
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oligocat import kernels

# -- oracles -----------------------------------------------------------------------


def rel_pairs(m, n):
    return {(p // n, p % n) for p in range(n * n) if (m >> p) & 1}


def rel_mask(pairs, n):
    return sum(1 << (a * n + b) for a, b in pairs)


def compose(b, a, n):
    rb, ra = rel_pairs(b, n), rel_pairs(a, n)
    return rel_mask({(x, z) for x, y in rb for y2, z in ra if y == y2}, n)


def is_full(b, a, c, n):
    rb, ra, rc = rel_pairs(b, n), rel_pairs(a, n), rel_pairs(c, n)
    w = [(x, y, z) for x, y in rb for y2, z in ra if y == y2 and (x, z) in rc]
    return ({(x, y) for x, y, _ in w} == rb and {(y, z) for _, y, z in w} == ra
            and {(x, z) for x, _, z in w} == rc)


def phi_oracle(b_orbits, above_ptr, above_idx, o23, o13, n23, n13, pw, wtable):
    orbs = [int(o) for zy in b_orbits for o in above_idx[above_ptr[zy]:above_ptr[zy + 1]]]
    r = np.zeros((1 << n23, 1 << n13), dtype=np.int64)
    for sel in range(1, 1 << len(orbs)):
        d = [orbs[i] for i in range(len(orbs)) if (sel >> i) & 1]
        j = 0
        k = 0
        cnt = {}
        for o in d:
            j |= 1 << int(o23[o])
            k |= 1 << int(o13[o])
            cnt[int(o13[o])] = cnt.get(int(o13[o]), 0) + 1
        r[j, k] += wtable[sum(int(pw[c - 1]) for c in cnt.values())]
    out = np.zeros_like(r)
    for jj in range(1 << n23):
        for j in range(1 << n23):
            if j & ~jj == 0:
                out[jj] += r[j]
    return out


# -- relation-set kernels -------------------------------------------------------

member_sets = st.integers(2, 3).flatmap(
    lambda n: st.tuples(st.just(n), st.sets(st.integers(1, (1 << (n * n)) - 1), min_size=1, max_size=10)))


@settings(max_examples=40)
@given(member_sets)
def test_relset_closure_backends(data):
    n, ms = data
    members = np.array(sorted(ms), dtype=np.int64)
    closed = all(compose(members[i], members[j], n) in ms for i in range(len(ms)) for j in range(len(ms)))
    for fn in (kernels.relset_closure_numba, kernels.relset_closure_numpy):
        i, j = fn(members, n)
        assert (i < 0) == closed
        if i >= 0:
            assert compose(int(members[i]), int(members[j]), n) not in ms


with_candidates = st.integers(2, 3).flatmap(
    lambda n: st.tuples(st.just(n),
                        st.sets(st.integers(1, (1 << (n * n)) - 1), min_size=1, max_size=10),
                        st.sets(st.integers(1, (1 << (n * n)) - 1), min_size=1, max_size=6)))


@settings(max_examples=30)
@given(with_candidates)
def test_relset_cands_backends(data):
    n, ms, cand_set = data
    members = np.array(sorted(ms), dtype=np.int64)
    cands = np.array(sorted(cand_set - ms), dtype=np.int64)
    want = any(is_full(int(b), int(a), int(c), n) for b in members for a in members for c in cands)
    for fn in (kernels.relset_cands_numba, kernels.relset_cands_numpy):
        i, j, c, tested = fn(members, n, cands)
        assert (i >= 0) == want
        if i >= 0:
            assert is_full(int(members[i]), int(members[j]), int(c), n)


@settings(max_examples=30)
@given(member_sets)
def test_relset_pairs_backends(data):
    n, ms = data
    members = np.array(sorted(ms), dtype=np.int64)
    orbit_masks = np.array([1 << p for p in range(n * n)], dtype=np.int64)
    want = False
    for b in members:
        for a in members:
            top = compose(int(b), int(a), n)
            for c in range(1, 1 << (n * n)):
                if c & ~top == 0 and c not in ms and is_full(int(b), int(a), c, n):
                    want = True
    for fn in (kernels.relset_pairs_numba, kernels.relset_pairs_numpy):
        i, j, c, tested = fn(members, n, orbit_masks)
        assert (i >= 0) == want
        if i >= 0:
            assert int(c) not in ms and is_full(int(members[i]), int(members[j]), int(c), n)


# -- functor accumulation --------------------------------------------------------

@st.composite
def phi_instances(draw):
    n_zy = draw(st.integers(1, 3))
    sizes = [draw(st.integers(0, 3)) for _ in range(n_zy)]
    total = sum(sizes)
    n23 = draw(st.integers(1, 3))
    n13 = draw(st.integers(1, 3))
    o23 = np.array([draw(st.integers(0, n23 - 1)) for _ in range(total)], dtype=np.int64)
    o13 = np.array([draw(st.integers(0, n13 - 1)) for _ in range(total)], dtype=np.int64)
    above_ptr = np.concatenate(([0], np.cumsum(sizes))).astype(np.int64)
    above_idx = np.array(draw(st.permutations(list(range(total)))), dtype=np.int64)
    b_orbits = np.array(sorted(draw(st.sets(st.integers(0, n_zy - 1), min_size=1))), dtype=np.int64)
    cmax = max(int(np.bincount(o13, minlength=n13).max()) if total else 1, 1)
    base = n13 + 1
    pw = np.array([base ** c for c in range(cmax)], dtype=np.int64)
    wtable = np.array([draw(st.integers(-4, 4)) for _ in range(base ** cmax)], dtype=np.int64)
    wtable[0] = 0
    return b_orbits, above_ptr, above_idx, o23, o13, n23, n13, pw, wtable


@settings(max_examples=60)
@given(phi_instances())
def test_phi_accumulate_backends(inst):
    want = phi_oracle(*inst)
    assert np.array_equal(kernels.phi_accumulate_numba(*inst), want)
    assert np.array_equal(kernels.phi_accumulate_numpy(*inst, chunk=7), want)
    assert np.array_equal(kernels._phi_accumulate(*inst), want)


def test_phi_verify_with_numpy_kernel(monkeypatch, z2):
    from oligocat.measures import trivial_degree
    from oligocat.tensor import verify_phi
    monkeypatch.setattr(kernels, "phi_accumulate", kernels.phi_accumulate_numpy)
    assert verify_phi(z2, trivial_degree(z2), 2).passed


# -- backend selection ---------------------------------------------------------------

@pytest.mark.parametrize("flag,backend", [("", "numba"), ("0", "numba"), ("1", "numpy")])
def test_backend_flag(flag, backend):
    env = dict(os.environ, OLIGOCAT_DISABLE_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", "from oligocat import _accel, kernels; "
                          "print(_accel.BACKEND, kernels.phi_accumulate.__name__)"],
                         env=env, capture_output=True, text=True, check=True).stdout.split()
    assert out[0] == backend
    assert out[1].endswith("numpy") == (backend == "numpy")


def test_numpy_backend_end_to_end():
    # the Möbius column feeds the derived measure on op-finset
    code = ("from oligocat.regcat import OpFinSetCategory, FinSet; "
            "from oligocat.measures import derive_measure, t_power_degree; "
            "c = OpFinSetCategory(); mu = derive_measure(t_power_degree(c)); "
            "print(mu.ring.fmt(mu.object_value(FinSet.of_size(3))))")
    outs = []
    for flag in ("", "1"):
        env = dict(os.environ, OLIGOCAT_DISABLE_NUMBA=flag)
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                   text=True, check=True).stdout.strip())
    assert outs[0] == outs[1] == "2*t - 3*t^2 + t^3"
