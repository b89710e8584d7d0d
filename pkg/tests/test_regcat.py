"""Regular categories of finite G-sets and of op-finite sets against set-level oracles."""
import itertools

import pytest
from hypothesis import given, strategies as st

from oligocat.errors import DomainError, InstanceMismatchError
from oligocat.groups import GSet, PermGroup, regular_gset, trivial_gset
from oligocat.regcat import FinSet, GSetCategory, OpFinSetCategory, Relation, set_partitions


def bell(n):
    # independent recursion through the Bell triangle
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def brute_compose_sets(b, a, nz, ny, nx):
    """Compose relations given as bitmasks in row-major target x source layout."""
    out = 0
    for z in range(nz):
        for x in range(nx):
            if any((b >> (z * ny + y)) & 1 and (a >> (y * nx + x)) & 1 for y in range(ny)):
                out |= 1 << (z * nx + x)
    return out


def uf_blocks(n, pairs):
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            i = parent[i]
        return i
    for i, j in pairs:
        parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(tuple(g) for g in groups.values())


def brute_corelation_compose(bk, ak, nz, ny, nx):
    """Glue partitions of Z+Y and Y+X along Y and restrict to Z+X."""
    # points: z in [0,nz), y in [nz, nz+ny), x in [nz+ny, ...)
    pairs = []
    for blk in bk:
        pairs += [(blk[0], p) for p in blk[1:]]
    for blk in ak:
        pairs += [(nz + blk[0], nz + p) for p in blk[1:]]
    blocks = uf_blocks(nz + ny + nx, pairs)
    out = []
    for blk in blocks:
        kept = tuple(p if p < nz else p - ny for p in blk if p < nz or p >= nz + ny)
        if kept:
            out.append(kept)
    return sorted(out)


Z2 = PermGroup.cyclic(2)
Z2_OBJS = [trivial_gset(Z2, 1), regular_gset(Z2), GSet(Z2, 3, ((1, 0, 2),))]


# -- RC-A ---------------------------------------------------------------------

@pytest.mark.parametrize("x", Z2_OBJS)
def test_subobject_count_is_power_of_orbits(z2, x):
    # [DERIVED] stable subsets are unions of orbits
    assert len(z2.subobjects(x)) == 2 ** x.rho
    brute = [m for m in range(1 << x.points)
             if all((m >> a[p]) & 1 for a in x.action for p in range(x.points) if (m >> p) & 1)]
    assert sorted(s.key for s in z2.subobjects(x)) == sorted(brute)


@pytest.mark.parametrize("x,y", list(itertools.product(Z2_OBJS, repeat=2)))
def test_product_is_cartesian(z2, x, y):
    prod = z2.product(x, y)
    assert prod.obj.points == x.points * y.points
    pairs = {(prod.projections[0].table[w], prod.projections[1].table[w]) for w in range(prod.obj.points)}
    assert pairs == set(itertools.product(range(x.points), range(y.points)))


def test_fiber_product_matches_brute(finset):
    x, y, w = (trivial_gset(PermGroup.trivial(), n) for n in (3, 2, 2))
    for f in finset.maps(x, y):
        for g in finset.maps(w, y):
            fp = finset.fiber_product(f, g)
            got = {(fp.p1.table[i], fp.p2.table[i]) for i in range(fp.obj.points)}
            want = {(a, b) for a in range(3) for b in range(2) if f.table[a] == g.table[b]}
            assert got == want and fp.obj.points == len(want)


def test_relation_composition_matches_brute(z2):
    x = GSet(Z2, 3, ((1, 0, 2),))
    y = regular_gset(Z2)
    rels_yx = z2.subobjects(z2.product(y, x).obj)
    rels_xy = z2.subobjects(z2.product(x, y).obj)
    for b in rels_xy:
        for a in rels_yx:
            c = z2.compose_rel(Relation(y, x, b), Relation(x, y, a)).rel.sub.key
            assert c == brute_compose_sets(b.key, a.key, 3, 2, 3)


def test_graph_of_identity_is_diagonal(finset):
    x = trivial_gset(PermGroup.trivial(), 3)
    g = finset.graph(finset.identity(x))
    assert g.sub.key == sum(1 << (i * 3 + i) for i in range(3))
    assert finset.is_equivalence_relation(g)


def test_kernel_pair_is_equivalence(z2):
    x = GSet(Z2, 3, ((1, 0, 2),))
    for f in z2.maps(x, trivial_gset(Z2, 2)):
        assert z2.is_equivalence_relation(z2.kernel_pair(f))


def test_unstable_subset_rejected(z2):
    with pytest.raises(DomainError):
        z2.sub(regular_gset(Z2), [0])


def test_mismatched_relation_rejected(finset):
    x = trivial_gset(PermGroup.trivial(), 2)
    y = trivial_gset(PermGroup.trivial(), 3)
    with pytest.raises(InstanceMismatchError):
        finset.relation(x, y, finset.top(finset.product(x, x).obj))


def test_objects_enumeration_counts(finset, z2):
    # [DERIVED] trivial group: one object per size; Z/2: partitions into orbit sizes 1 and 2
    assert [x.points for x in finset.objects(4)] == [1, 2, 3, 4]
    sizes = sorted(x.points for x in z2.objects(4))
    assert sizes == [1, 2, 2, 3, 3, 4, 4, 4]


@given(st.integers(0, 63), st.integers(0, 7))
def test_image_preimage_galois(s_bits, t_bits):
    # [DERIVED] image(S) <= T iff S <= preimage(T)
    cat = GSetCategory(PermGroup.trivial())
    x = trivial_gset(PermGroup.trivial(), 6)
    y = trivial_gset(PermGroup.trivial(), 3)
    f = cat.gmap(x, y, (0, 1, 2, 0, 1, 1))
    s = cat.sub(x, [i for i in range(6) if (s_bits >> i) & 1])
    t = cat.sub(y, [i for i in range(3) if (t_bits >> i) & 1])
    assert cat.leq(cat.image_of_sub(f, s), t) == cat.leq(s, cat.preimage(f, t))


# -- RC-B ---------------------------------------------------------------------

@pytest.mark.parametrize("n", range(0, 6))
def test_partition_counts_are_bell(n):
    assert len(set_partitions(n)) == bell(n)


def test_opfinset_subobject_order(opfin):
    # [TRIVIAL] top is the discrete partition, bottom the one-block partition
    x = FinSet.of_size(3)
    subs = opfin.subobjects(x)
    assert subs[0] == opfin.bottom(x) and subs[-1] == opfin.top(x)
    for s in subs:
        assert opfin.leq(opfin.bottom(x), s) and opfin.leq(s, opfin.top(x))


def test_opfinset_product_is_disjoint_union(opfin):
    prod = opfin.product(FinSet.of_size(2), FinSet.of_size(3))
    assert prod.obj.size == 5
    assert prod.projections[1].table == (2, 3, 4)


def test_opfinset_final_is_empty(opfin):
    assert opfin.final().size == 0
    assert len(opfin.types()) == 1


def test_corelation_composition_matches_brute(opfin):
    z, y, x = FinSet.of_size(1), FinSet.of_size(2), FinSet.of_size(2)
    for bk in set_partitions(3):
        for ak in set_partitions(4):
            b = Relation(y, z, opfin.sub(opfin.product(z, y).obj, bk))
            a = Relation(x, y, opfin.sub(opfin.product(y, x).obj, ak))
            got = sorted(opfin.compose_rel(b, a).rel.sub.key)
            assert got == brute_corelation_compose(bk, ak, 1, 2, 2)


def test_opfinset_rejects_bad_partition(opfin):
    with pytest.raises(DomainError):
        opfin.sub(FinSet.of_size(3), [[0, 1]])


@given(st.sampled_from(set_partitions(4)), st.sampled_from(set_partitions(4)))
def test_opfinset_meet_is_greatest_lower_bound(p, q):
    cat = OpFinSetCategory()
    x = FinSet.of_size(4)
    s, t = cat.sub(x, p), cat.sub(x, q)
    m = cat.meet(s, t)
    assert cat.leq(m, s) and cat.leq(m, t)
    lower = [u for u in cat.subobjects(x) if cat.leq(u, s) and cat.leq(u, t)]
    assert all(cat.leq(u, m) for u in lower)
