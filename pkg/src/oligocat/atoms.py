"""Objects of the order C as finite unions of atoms B(X).

Products and fiber products of atoms decompose over ample subobjects;
A1(X) is the union of B(Y) over principal subobjects Y of X. The second
half handles invariant equivalence relations on B(X), encoded as sets of
ample subobjects of X x X, and the quotient-or-subgroup dichotomy.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np

from . import kernels
from .errors import DomainError, PreconditionError, SizeLimitError
from .groups import PermGroup, Permutation, are_isomorphic_gsets
from .regcat import GSetCategory, Mor, RegularCategory, Subobject

RELSET_POINT_BOUND = 6


@dataclass(frozen=True)
class Atom:
    """B(X), or B(X)/Gamma when ``gamma`` is given (RC-A only)."""
    label: Any
    gamma: Optional[PermGroup] = None


@dataclass(frozen=True)
class CObject:
    """A finite disjoint union of atoms.

    ``origins`` records, atom by atom, the subobject the atom was cut out of
    (an ample subobject for products, a principal subobject for A1); the
    atom order is the order of those subobjects.
    """
    atoms: tuple[Atom, ...]
    origins: tuple = ()

    def __len__(self):
        return len(self.atoms)


def atom(cat: RegularCategory, x, gamma: Optional[PermGroup] = None) -> Atom:
    if not cat.is_principal(x):
        raise DomainError("atoms are labelled by principal objects")
    if gamma is not None:
        if not isinstance(cat, GSetCategory):
            raise DomainError("quotient atoms exist only for G-sets")
        from .groups import aut_gset
        aut = aut_gset(x)
        if any(tuple(g) not in aut for g in gamma.elements()):
            raise DomainError("Gamma is not a subgroup of Aut(X)")
    return Atom(x, gamma)


def _from_subs(cat, subs: Sequence[Subobject]) -> CObject:
    return CObject(tuple(Atom(cat.materialize(s)[0]) for s in subs), tuple(subs))


def atom_product(cat: RegularCategory, a: Atom, b: Atom) -> CObject:
    if a.gamma is not None or b.gamma is not None:
        raise DomainError("products are decomposed only for Gamma-free atoms")
    return _from_subs(cat, cat.ample_of_product(cat.product(a.label, b.label)))


def atom_fiber_product(cat: RegularCategory, f: Mor, g: Mor) -> CObject:
    """B(X) x_B(Z) B(Y) for surjections f: X -> Z, g: Y -> Z."""
    if not (cat.is_surjection(f) and cat.is_surjection(g)):
        raise DomainError("maps of atoms are induced by surjections")
    fp = cat.fiber_product(f, g)
    return _from_subs(cat, cat.ample_subobjects(fp.obj, [fp.p1, fp.p2]))


def build_a1(cat: RegularCategory, x) -> CObject:
    """A1(X): one atom B(Y) per principal subobject Y of X."""
    if not cat.is_principal(x):
        raise DomainError("A1 is defined for principal objects")
    cache = cat.__dict__.setdefault("_a1", {})
    c = cache.get(x)
    if c is None:
        c = _from_subs(cat, cat.principal_subobjects(x))
        cache[x] = c
    return c


def c_sum(*objs: CObject) -> CObject:
    return CObject(tuple(a for o in objs for a in o.atoms), tuple(s for o in objs for s in o.origins))


def multiplicity_one(cat: RegularCategory, x, y) -> bool:
    """No ample W other than X x Y itself is isomorphic to X x Y."""
    prod = cat.product(x, y)
    top = cat.top(prod.obj)
    for w in cat.ample_of_product(prod):
        if w == top:
            continue
        obj = cat.materialize(w)[0]
        if isinstance(cat, GSetCategory):
            if are_isomorphic_gsets(obj, prod.obj) is not None:
                return False
        elif cat.size(obj) == cat.size(prod.obj):
            return False
    return True


# ---------------------------------------------------------------------------
# relation sets

@dataclass(frozen=True)
class RelationSet:
    ambient: Any
    members: frozenset  # subobjects of ambient x ambient

    def __len__(self):
        return len(self.members)


@dataclass
class RelCheck:
    ok: bool
    tag: Optional[str] = None          # first failing condition: a, b, c, closure
    witness: Optional[dict] = None
    closure_ok: Optional[bool] = None  # the composition-closure consequence
    strategy: Optional[str] = None
    tested: int = 0


@dataclass(frozen=True)
class ProperQuotient:
    map: Mor
    kernel: Subobject


@dataclass(frozen=True)
class SubgroupResult:
    group: PermGroup
    elements: frozenset


def _mask_of_pairs(n, pairs) -> int:
    m = 0
    for a, b in pairs:
        m |= 1 << (a * n + b)
    return m


def _xx(cat, x):
    return cat.product(x, x).obj


def relation_set(cat, x, subs) -> RelationSet:
    amb = _xx(cat, x)
    subs = frozenset(subs)
    for s in subs:
        if s.ambient != amb:
            raise DomainError("relation set members must be subobjects of X x X")
    rs = RelationSet(x, subs)
    prod = cat.product(x, x)
    for s in subs:
        if any(cat.image_of_sub(p, s) != cat.top(p.target) for p in prod.projections):
            raise DomainError("relation set members must be ample")
    return rs


def ample_relations(cat: GSetCategory, x) -> np.ndarray:
    """Masks of all ample G-stable subsets of X x X, vectorised over orbits."""
    n = x.points
    prod = cat.product(x, x)
    orbs = prod.obj.orbits
    k = len(orbs)
    if k > 24:
        raise SizeLimitError("too many orbits in X x X")
    omask = np.array([sum(1 << p for p in o) for o in orbs], dtype=np.int64)
    # projections of an orbit can repeat a point, so collect them as sets
    p1 = np.array([sum(1 << r for r in {p // n for p in o}) for o in orbs], dtype=np.int64)
    p2 = np.array([sum(1 << c for c in {p % n for p in o}) for o in orbs], dtype=np.int64)
    sels = np.arange(1, 1 << k, dtype=np.int64)
    m = np.zeros(sels.shape, dtype=np.int64)
    a = np.zeros(sels.shape, dtype=np.int64)
    b = np.zeros(sels.shape, dtype=np.int64)
    for i in range(k):
        on = ((sels >> i) & 1) == 1
        m[on] |= omask[i]
        a[on] |= p1[i]
        b[on] |= p2[i]
    full = (1 << n) - 1
    return np.sort(m[(a == full) & (b == full)])


def relation_set_check(cat: RegularCategory, rs: RelationSet) -> RelCheck:
    """Conditions (a) diagonal, (b) transpose, (c) ternary closure, plus
    closure under composition (a consequence of (c))."""
    if isinstance(cat, GSetCategory):
        return _relset_check_rca(cat, rs)
    return _relset_check_generic(cat, rs)


def _swap_mask(m: int, n: int) -> int:
    out = 0
    for a in range(n):
        for b in range(n):
            if (m >> (a * n + b)) & 1:
                out |= 1 << (b * n + a)
    return out


def _relset_check_rca(cat: GSetCategory, rs: RelationSet) -> RelCheck:
    x = rs.ambient
    n = x.points
    if n > RELSET_POINT_BOUND + 1:
        raise SizeLimitError(f"relation-set checks are bounded to {RELSET_POINT_BOUND + 1} points")
    members = np.array(sorted(s.key for s in rs.members), dtype=np.int64)
    mset = set(int(v) for v in members)
    diag = cat.diagonal(x).key
    if diag not in mset:
        return RelCheck(False, "a", {"missing": "diagonal"})
    for v in mset:
        t = _swap_mask(v, n)
        if t not in mset:
            return RelCheck(False, "b", {"member": _pairs(v, n), "transpose": _pairs(t, n)})
    orbit_masks = np.array(cat.orbit_masks(cat.product(x, x).obj), dtype=np.int64)
    # pick the cheaper exact strategy
    m = len(members)
    ample = ample_relations(cat, x)
    cands = ample[~np.isin(ample, members)]
    cost_cands = len(cands) * m * m
    cost_pairs = _pairs_cost(members, n, orbit_masks) if m <= 2000 and cost_cands else float("inf")
    if cost_cands <= cost_pairs:
        i, j, c, tested = kernels.relset_cands(members, n, cands)
        strategy = "candidates"
    else:
        i, j, c, tested = kernels.relset_pairs(members, n, orbit_masks)
        strategy = "pairs"
    if i >= 0:
        return RelCheck(False, "c", {"p12": _pairs(int(members[i]), n), "p23": _pairs(int(members[j]), n),
                                     "p13": _pairs(int(c), n)}, strategy=strategy, tested=int(tested))
    bi, bj = kernels.relset_closure(members, n)
    closure_ok = bi < 0
    res = RelCheck(True, None, None, closure_ok, strategy, int(tested))
    if not closure_ok:
        res.ok = False
        res.tag = "closure"
        res.witness = {"B": _pairs(int(members[bi]), n), "A": _pairs(int(members[bj]), n)}
    return res


def _pairs_cost(members, n, orbit_masks) -> int:
    """Number of candidate subsets the pairs strategy would visit."""
    rel = kernels._bool_rel(members, n)
    total = 0
    for i in range(rel.shape[0]):
        comp = (np.einsum("ab,jbc->jac", rel[i], rel) > 0).astype(np.int64)
        cm = kernels._to_mask(comp, n)
        inside = ((cm[:, None] & orbit_masks[None, :]) == orbit_masks[None, :]).sum(axis=1)
        total += int(np.sum(np.left_shift(np.int64(1), inside)))
    return total


def _pairs(m: int, n: int) -> list:
    return [[p // n, p % n] for p in range(n * n) if (m >> p) & 1]


def _relset_check_generic(cat: RegularCategory, rs: RelationSet) -> RelCheck:
    """Same conditions through the category interface (any instance, small X)."""
    x = rs.ambient
    xx = cat.product(x, x).obj
    members = rs.members
    if cat.diagonal(x) not in members:
        return RelCheck(False, "a", {"missing": "diagonal"})
    for s in members:
        if cat.transpose(cat.relation(x, x, s)).sub not in members:
            return RelCheck(False, "b", {"member": cat.sub_json(s)})
    t = cat.ternary(x, x, x)
    tested = 0
    # (c) through maximal triples: W = p12^-1(B) & p23^-1(A) & p13^-1(C)
    for b in members:
        pb = cat.preimage(t.p12, b)
        for a in members:
            pba = cat.meet(pb, cat.preimage(t.p23, a))
            top = cat.image_of_sub(t.p13, pba)
            for c in cat.subobjects(xx):
                if c in members or not cat.leq(c, top):
                    continue
                tested += 1
                w = cat.meet(pba, cat.preimage(t.p13, c))
                if (cat.image_of_sub(t.p12, w) == b and cat.image_of_sub(t.p23, w) == a
                        and cat.image_of_sub(t.p13, w) == c):
                    return RelCheck(False, "c", {"p12": cat.sub_json(b), "p23": cat.sub_json(a),
                                                 "p13": cat.sub_json(c)}, strategy="generic", tested=tested)
    for b in members:
        for a in members:
            c = cat.compose_rel(cat.relation(x, x, b), cat.relation(x, x, a)).rel.sub
            if c not in members:
                return RelCheck(False, "closure", {"B": cat.sub_json(b), "A": cat.sub_json(a)},
                                closure_ok=False, strategy="generic", tested=tested)
    return RelCheck(True, None, None, True, "generic", tested)


def maximal_reflexive_element(cat: GSetCategory, rs: RelationSet, check: Optional[RelCheck] = None) -> Subobject:
    """The maximal member containing the diagonal, verified to be an
    equivalence relation that contains every reflexive member and whose
    ample subobjects all lie in the set."""
    check = check or relation_set_check(cat, rs)
    if not check.ok:
        raise PreconditionError(f"relation set fails condition {check.tag}", check.witness)
    x = rs.ambient
    diag = cat.diagonal(x)
    refl = [s for s in rs.members if cat.leq(diag, s)]
    maximal = [s for s in refl if not any(s != t and cat.leq(s, t) for t in refl)]
    if len(maximal) != 1:
        raise DomainError(f"expected one maximal reflexive member, found {len(maximal)}")
    r = maximal[0]
    if not all(cat.leq(s, r) for s in refl):
        raise DomainError("maximal reflexive member does not contain all reflexive members")
    if not cat.is_equivalence_relation(cat.relation(x, x, r)):
        raise DomainError("maximal reflexive member is not an equivalence relation")
    keys = {s.key for s in rs.members}
    if isinstance(cat, GSetCategory) and x.points <= RELSET_POINT_BOUND + 1:
        amp = ample_relations(cat, x)
        inside = amp[(amp & ~np.int64(r.key)) == 0]
        if not all(int(v) in keys for v in inside):
            raise DomainError("an ample subobject of R is missing from the set")
    return r


def equivalence_dichotomy(cat: GSetCategory, rs: RelationSet, check: Optional[RelCheck] = None):
    """ProperQuotient(X -> X/R) if R exceeds the diagonal, else Subgroup(Gamma)."""
    if not isinstance(cat, GSetCategory):
        raise DomainError("the dichotomy is stated for exact categories of G-sets")
    r = maximal_reflexive_element(cat, rs, check)
    x = rs.ambient
    n = x.points
    diag = cat.diagonal(x)
    if r != diag:
        blocks: dict[int, list[int]] = {}
        for a in range(n):
            rep = min(b for b in range(n) if (r.key >> (a * n + b)) & 1)
            blocks.setdefault(rep, []).append(a)
        q = cat.quotient(x, list(blocks.values()))
        kp = cat.kernel_pair(q).sub
        if kp != r:
            raise DomainError("quotient kernel pair differs from R")
        return ProperQuotient(q, r)
    elems = set()
    for s in rs.members:
        # Lemma: the projection to the second factor is an isomorphism
        obj, mono = cat.materialize(s)
        p1, p2 = cat.product(x, x).projections
        f1, f2 = cat.compose(p1, mono), cat.compose(p2, mono)
        if not (cat.is_iso(f2) and cat.is_iso(f1)):
            raise DomainError("member is not the graph of an automorphism")
        inv2 = {v: i for i, v in enumerate(f2.table)}
        elems.add(Permutation(f1.table[inv2[p]] for p in range(n)))
    ident = Permutation.identity(n)
    if ident not in elems or any(a * b not in elems for a in elems for b in elems):
        raise DomainError("automorphisms do not form a group")
    return SubgroupResult(PermGroup(n, tuple(sorted(elems))), frozenset(elems))


def graph_relation_set(cat: GSetCategory, x, gamma) -> RelationSet:
    """R_Gamma: the graphs {(g(p), p)} of the elements of Gamma."""
    xx = _xx(cat, x)
    n = x.points
    subs = [Subobject(xx, _mask_of_pairs(n, [(g[p], p) for p in range(n)])) for g in gamma]
    return RelationSet(x, frozenset(subs))


def quotient_relation_set(cat: GSetCategory, q: Mor) -> RelationSet:
    """All ample subobjects of X x X contained in the kernel pair of q."""
    x = q.source
    r = cat.kernel_pair(q).sub
    amp = ample_relations(cat, x)
    xx = _xx(cat, x)
    inside = amp[(amp & ~np.int64(r.key)) == 0]
    return RelationSet(x, frozenset(Subobject(xx, int(v)) for v in inside))


def g_stable_partitions(cat: GSetCategory, x) -> list:
    """Quotients of x, as G-stable partitions of its points."""
    from .regcat import set_partitions
    out = []
    for part in set_partitions(x.points):
        where = {p: i for i, b in enumerate(part) for p in b}
        if all(len({where[a[p]] for p in b}) == 1 for a in x.action for b in part):
            out.append(part)
    return out


def dichotomy_suite(cat: GSetCategory, bound: int):
    """For every non-empty x with at most `bound` points: each subgroup of
    Aut(x) comes back from its graph set, and each proper quotient comes
    back with its kernel pair. Every passing set must also be closed under
    composition."""
    from .groups import aut_gset
    from .measures import Report
    rep = Report("dichotomy-suite", cat.describe(), bound)
    n_sub = n_quot = 0
    for x in cat.objects(bound, principal=True):
        label = cat.object_json(x)
        for h in aut_gset(x).subgroups():
            n_sub += 1
            rs = graph_relation_set(cat, x, h)
            chk = relation_set_check(cat, rs)
            if not (chk.ok and chk.closure_ok):
                rep.fail(reason="graph set rejected", object=label, subgroup=sorted(map(list, h)), tag=chk.tag)
                continue
            res = equivalence_dichotomy(cat, rs, chk)
            if not isinstance(res, SubgroupResult) or res.elements != frozenset(h):
                rep.fail(reason="subgroup not recovered", object=label, subgroup=sorted(map(list, h)))
        for part in g_stable_partitions(cat, x):
            if len(part) == x.points:
                continue
            n_quot += 1
            q = cat.quotient(x, part)
            rs = quotient_relation_set(cat, q)
            chk = relation_set_check(cat, rs)
            if not (chk.ok and chk.closure_ok):
                rep.fail(reason="quotient set rejected", object=label, partition=[list(b) for b in part],
                         tag=chk.tag)
                continue
            res = equivalence_dichotomy(cat, rs, chk)
            if not isinstance(res, ProperQuotient) or res.kernel != cat.kernel_pair(q).sub:
                rep.fail(reason="quotient not recovered", object=label, partition=[list(b) for b in part])
    rep.stats.update(subgroups=n_sub, quotients=n_quot)
    return rep
