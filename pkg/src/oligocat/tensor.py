"""Knop's relation algebra, orbit-indexed matrices, and the functor between them.

A Knop morphism [X] -> [Y] is a linear combination of principal relations
A inside Y x X, composed by [B] o [A] = nu(f) [B o A] with f the image
surjection from B x_Y A. A matrix between C-objects has one entry per orbit
of each product of atoms, i.e. per ample subobject W of Y_j x X_i, and is
composed by pulling back, multiplying, and pushing forward with mu.

Phi sends [X] to the vector space on A1(X) and [A] to the indicator of the
principal relations contained in A.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import product as iproduct
from typing import Any, Callable, Optional

import numpy as np

from . import kernels
from .atoms import Atom, CObject, build_a1
from .errors import DomainError, InstanceMismatchError
from .measures import DegreeFunction, DerivedMeasure, Measure, RegularMeasure, Report
from .regcat import _canon_partition, GSetCategory, Mor, OpFinSetCategory, RegularCategory, Relation, Subobject, set_partitions
from .rings import Ring


# ---------------------------------------------------------------------------
# Knop morphisms

class KnopMor:
    """A linear combination of principal relations source -> target."""

    def __init__(self, source, target, terms: dict, ring: Ring):
        self.source = source
        self.target = target
        self.ring = ring
        zero = ring.zero()
        self.terms = {k: v for k, v in terms.items() if v != zero}

    def __eq__(self, other):
        return (isinstance(other, KnopMor) and self.source == other.source
                and self.target == other.target and self.terms == other.terms)

    def __add__(self, other):
        _same_ends(self, other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, self.ring.zero()) + v
        return KnopMor(self.source, self.target, out, self.ring)

    def scale(self, c):
        return KnopMor(self.source, self.target, {k: c * v for k, v in self.terms.items()}, self.ring)

    def __repr__(self):
        return f"KnopMor({len(self.terms)} terms)"


def _same_ends(a, b):
    if a.source != b.source or a.target != b.target:
        raise InstanceMismatchError("morphisms have different source or target")


def knop_basis(cat: RegularCategory, x, y, sub: Subobject, ring: Ring) -> KnopMor:
    if sub.ambient != cat.product(y, x).obj:
        raise InstanceMismatchError("relation must be a subobject of target x source")
    if not _is_principal_sub(cat, sub):
        raise DomainError("basis relations are principal")
    return KnopMor(x, y, {sub: ring.one()}, ring)


def knop_identity(cat: RegularCategory, x, ring: Ring) -> KnopMor:
    return KnopMor(x, x, {cat.diagonal(x): ring.one()}, ring)


def _is_principal_sub(cat, s: Subobject) -> bool:
    cache = cat.__dict__.setdefault("_principal_subs", {})
    v = cache.get(s)
    if v is None:
        v = cat.is_principal(cat.materialize(s)[0])
        cache[s] = v
    return v


def compose_basis(cat: RegularCategory, nu: DegreeFunction, z, y, x, bsub: Subobject, asub: Subobject):
    """[B] o [A] as (C, coefficient), or None when B o A is not principal."""
    comp = cat.compose_rel(Relation(y, z, bsub), Relation(x, y, asub))
    c = comp.rel.sub
    if not _is_principal_sub(cat, c):
        return None
    return c, nu(comp.surjection)


def knop_compose(cat: RegularCategory, nu: DegreeFunction, b: KnopMor, a: KnopMor) -> KnopMor:
    if a.target != b.source:
        raise InstanceMismatchError("middle objects differ")
    ring = nu.ring
    out: dict = {}
    for bs, bc in b.terms.items():
        for as_, ac in a.terms.items():
            r = compose_basis(cat, nu, b.target, b.source, a.source, bs, as_)
            if r is None:
                continue
            c, w = r
            out[c] = out.get(c, ring.zero()) + bc * ac * w
    return KnopMor(a.source, b.target, out, ring)


def _tensor_sub(cat, y, x, y2, x2, s: Subobject, s2: Subobject) -> Subobject:
    """A x B inside (Y x Y') x (X x X') for A in Y x X and B in Y' x X'."""
    yy, xx = cat.product(y, y2), cat.product(x, x2)
    big = cat.product(yy.obj, xx.obj)
    pyy, pxx = big.projections
    to_a = cat.pair(cat.product(y, x), [cat.compose(yy.projections[0], pyy), cat.compose(xx.projections[0], pxx)])
    to_b = cat.pair(cat.product(y2, x2), [cat.compose(yy.projections[1], pyy), cat.compose(xx.projections[1], pxx)])
    return cat.meet(cat.preimage(to_a, s), cat.preimage(to_b, s2))


def knop_tensor(cat: RegularCategory, a: KnopMor, b: KnopMor) -> KnopMor:
    ring = a.ring
    src = cat.product(a.source, b.source).obj
    tgt = cat.product(a.target, b.target).obj
    out: dict = {}
    for s, c in a.terms.items():
        for s2, c2 in b.terms.items():
            t = _tensor_sub(cat, a.target, a.source, b.target, b.source, s, s2)
            out[t] = out.get(t, ring.zero()) + c * c2
    return KnopMor(src, tgt, out, ring)


# ---------------------------------------------------------------------------
# orbit-indexed matrices

class PermMatrix:
    """Entries keyed by (target atom j, source atom i, ample W in Y_j x X_i)."""

    def __init__(self, source: CObject, target: CObject, entries: dict, ring: Ring):
        self.source = source
        self.target = target
        self.ring = ring
        zero = ring.zero()
        self.entries = {k: v for k, v in entries.items() if v != zero}

    def __eq__(self, other):
        return (isinstance(other, PermMatrix) and self.source == other.source
                and self.target == other.target and self.entries == other.entries)

    def __add__(self, other):
        _same_ends(self, other)
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, self.ring.zero()) + v
        return PermMatrix(self.source, self.target, out, self.ring)

    def scale(self, c):
        return PermMatrix(self.source, self.target, {k: c * v for k, v in self.entries.items()}, self.ring)

    def __repr__(self):
        return f"PermMatrix({len(self.target)}x{len(self.source)}, {len(self.entries)} entries)"


def orbit_keys(cat: RegularCategory, target: CObject, source: CObject) -> list:
    """Every entry index of a matrix source -> target."""
    out = []
    for j, aj in enumerate(target.atoms):
        for i, ai in enumerate(source.atoms):
            for w in cat.ample_of_product(cat.product(aj.label, ai.label)):
                out.append((j, i, w))
    return out


def perm_identity(cat: RegularCategory, x: CObject, ring: Ring) -> PermMatrix:
    return PermMatrix(x, x, {(i, i, cat.diagonal(a.label)): ring.one() for i, a in enumerate(x.atoms)}, ring)


def _image_weight(cat, mu: Measure, leg: Mor, mono: Mor):
    e, s = cat.image(cat.compose(leg, mono))
    return s, mu.value(e)


def perm_compose(cat: RegularCategory, mu: Measure, b: PermMatrix, a: PermMatrix) -> PermMatrix:
    """(p13)_* (p12^* b . p23^* a), one triple-product orbit at a time."""
    if a.target != b.source:
        raise InstanceMismatchError("middle objects differ")
    ring = mu.ring
    out: dict = {}
    by_mid: dict = {}
    for (j, i, w2), v in a.entries.items():
        by_mid.setdefault(j, []).append((i, w2, v))
    sub_cache: dict = {}
    for (k, j, w1), bv in b.entries.items():
        for i, w2, av in by_mid.get(j, ()):
            zl, yl, xl = b.target.atoms[k].label, b.source.atoms[j].label, a.source.atoms[i].label
            t = cat.ternary(zl, yl, xl)
            for dsub, wt in _orbits_over(cat, mu, t, w1, w2, sub_cache):
                key = (k, i, dsub)
                out[key] = out.get(key, ring.zero()) + bv * av * wt
    return PermMatrix(a.source, b.target, out, ring)


def _orbits_over(cat, mu, t, w1, w2, cache):
    """Ample D in Z x Y x X with p12(D) = w1 and p23(D) = w2, with p13(D) and mu(D -> p13(D))."""
    key = (t.obj, w1, w2)
    hit = cache.get(key)
    if hit is not None:
        return hit
    top = cat.meet(cat.preimage(t.p12, w1), cat.preimage(t.p23, w2))
    tobj, tmono = cat.materialize(top)
    res = []
    for s in cat.subobjects(tobj):
        d = cat.image_of_sub(tmono, s)
        if cat.image_of_sub(t.p12, d) != w1 or cat.image_of_sub(t.p23, d) != w2:
            continue
        dobj, dmono = cat.materialize(d)
        c, wt = _image_weight(cat, mu, t.p13, dmono)
        res.append((c, wt))
    cache[key] = res
    return res


def c_product(cat: RegularCategory, p: CObject, q: CObject) -> CObject:
    """Atoms B(U) for ample U in P_i x Q_i'; origins are (i, i', U)."""
    atoms, origins = [], []
    for i, a in enumerate(p.atoms):
        for i2, a2 in enumerate(q.atoms):
            for u in cat.ample_of_product(cat.product(a.label, a2.label)):
                atoms.append(Atom(cat.materialize(u)[0]))
                origins.append((i, i2, u))
    return CObject(tuple(atoms), tuple(origins))


def perm_tensor(cat: RegularCategory, m: PermMatrix, n: PermMatrix) -> PermMatrix:
    """Kronecker product: the entry at an orbit W of B(V) x B(U) is the product
    of the entries at the images of W in Y_j x X_i and Y'_j' x X'_i'."""
    ring = m.ring
    src = c_product(cat, m.source, n.source)
    tgt = c_product(cat, m.target, n.target)
    by_m: dict = {}
    for (j, i, w), v in m.entries.items():
        by_m.setdefault((j, i), {})[w] = v
    by_n: dict = {}
    for (j, i, w), v in n.entries.items():
        by_n.setdefault((j, i), {})[w] = v
    out = {}
    for b, (j, j2, vsub) in enumerate(tgt.origins):
        for a, (i, i2, usub) in enumerate(src.origins):
            em, en = by_m.get((j, i)), by_n.get((j2, i2))
            if not em or not en:
                continue
            yj, y2 = m.target.atoms[j].label, n.target.atoms[j2].label
            xi, x2 = m.source.atoms[i].label, n.source.atoms[i2].label
            vobj, vmono = cat.materialize(vsub)
            uobj, umono = cat.materialize(usub)
            big = cat.product(vobj, uobj)
            pv, pu = big.projections
            yy, xx = cat.product(yj, y2), cat.product(xi, x2)
            to1 = cat.pair(cat.product(yj, xi), [cat.compose(yy.projections[0], cat.compose(vmono, pv)),
                                                 cat.compose(xx.projections[0], cat.compose(umono, pu))])
            to2 = cat.pair(cat.product(y2, x2), [cat.compose(yy.projections[1], cat.compose(vmono, pv)),
                                                 cat.compose(xx.projections[1], cat.compose(umono, pu))])
            for w in cat.ample_of_product(big):
                v1 = em.get(cat.image_of_sub(to1, w))
                v2 = en.get(cat.image_of_sub(to2, w))
                if v1 is not None and v2 is not None:
                    out[(b, a, w)] = v1 * v2
    return PermMatrix(src, tgt, out, ring)


def pushforward(cat: RegularCategory, mu: Measure, assign: list, values: dict, n_target: int) -> dict:
    """f_*(1_A) = mu(A -> f(A)) 1_f(A), extended linearly.

    ``assign[i] = (j, e)`` says source atom i maps onto target atom j by the
    surjection e; ``values`` is a function on source atoms (index -> coeff).
    """
    out: dict = {}
    for i, v in values.items():
        j, e = assign[i]
        if not 0 <= j < n_target:
            raise DomainError("target atom out of range")
        out[j] = out.get(j, mu.ring.zero()) + mu.value(e) * v
    return {j: v for j, v in out.items() if v != mu.ring.zero()}


def trace(cat: RegularCategory, mu: Measure, m: PermMatrix):
    """Sum over atoms O of mu(B(O)) times the entry at the diagonal orbit."""
    if m.source != m.target:
        raise DomainError("trace needs an endomorphism")
    acc = mu.ring.zero()
    for i, a in enumerate(m.source.atoms):
        v = m.entries.get((i, i, cat.diagonal(a.label)))
        if v is not None:
            acc = acc + mu.object_value(a.label) * v
    return acc


def categorical_dim(cat: RegularCategory, mu: Measure, x: CObject):
    return trace(cat, mu, perm_identity(cat, x, mu.ring))


# ---------------------------------------------------------------------------
# the functor

def phi_objects(cat: RegularCategory, x) -> CObject:
    return build_a1(cat, x)


def a1_index(cat: RegularCategory, y, x) -> dict:
    """Principal C in Y x X  <->  (j, i, W) with W ample in Y_j x X_i."""
    cache = cat.__dict__.setdefault("_a1_index", {})
    hit = cache.get((y, x))
    if hit is not None:
        return hit
    ay, ax = build_a1(cat, y), build_a1(cat, x)
    yx = cat.product(y, x)
    fwd, back = {}, {}
    for j, sj in enumerate(ay.origins):
        oj, mj = cat.materialize(sj)
        for i, si in enumerate(ax.origins):
            oi, mi = cat.materialize(si)
            p = cat.product(oj, oi)
            emb = cat.pair(yx, [cat.compose(mj, p.projections[0]), cat.compose(mi, p.projections[1])])
            for w in cat.ample_of_product(p):
                c = cat.image_of_sub(emb, w)
                fwd[c] = (j, i, w)
                back[(j, i, w)] = c
    if len(fwd) != len(back):
        raise DomainError("orbit matching is not a bijection")
    cache[(y, x)] = (fwd, back)
    return fwd, back


def phi_morphisms(cat: RegularCategory, a: KnopMor) -> PermMatrix:
    fwd, _ = a1_index(cat, a.target, a.source)
    ring = a.ring
    out: dict = {}
    for s, c in a.terms.items():
        for csub, key in fwd.items():
            if cat.leq(csub, s):
                out[key] = out.get(key, ring.zero()) + c
    return PermMatrix(build_a1(cat, a.source), build_a1(cat, a.target), out, ring)


def _mu_for(nu: DegreeFunction, mu: Optional[Measure]) -> Measure:
    return mu if mu is not None else DerivedMeasure(nu)


def signature_weight(mu: Measure) -> Optional[Callable]:
    """counts -> mu, when mu on G-set atoms depends only on fiber orbit counts."""
    if isinstance(mu, DerivedMeasure) and isinstance(mu.cat, GSetCategory) and mu.nu.trivial:
        return mu.value_for_signature
    if isinstance(mu, RegularMeasure) and mu._rho_rule is not None:
        return lambda counts: mu.ring.coerce(mu._rho_rule(sum(counts))) / mu.ring.coerce(
            mu._rho_rule(len(counts)))
    return None


DEFAULT_BUDGET = 2 * 10 ** 9


def _lower_covers(cat: RegularCategory, s: Subobject) -> list:
    amb = s.ambient
    if isinstance(cat, GSetCategory):
        out = []
        for orb in amb.orbits:
            if (s.key >> orb[0]) & 1:
                m = 0
                for p in orb:
                    m |= 1 << p
                out.append(Subobject(amb, s.key & ~m))
        return out
    if isinstance(cat, OpFinSetCategory):
        bs = s.key
        return [cat.sub(amb, [b for k, b in enumerate(bs) if k not in (i, j)] + [bs[i] + bs[j]])
                for i in range(len(bs)) for j in range(i + 1, len(bs))]
    return [c for c in cat.subobjects(amb) if c != s and cat.leq(c, s)]


def unitriangular_check(cat: RegularCategory, y, x) -> tuple[bool, dict]:
    """[A] -> sum of 1_C over C <= A is unitriangular in the subobject order,
    and principal relations match matrix entries one to one."""
    subs = cat.subobjects(cat.product(y, x).obj)
    pos = {s: k for k, s in enumerate(subs)}
    prin = [s for s in subs if _is_principal_sub(cat, s)]
    # the listing order must extend the subobject order; checking lower
    # covers suffices since the order is their transitive closure
    for a in prin:
        for c in _lower_covers(cat, a):
            if pos[c] > pos[a]:
                return False, {"A": cat.sub_json(a), "C": cat.sub_json(c)}
    n_keys = len(orbit_keys(cat, build_a1(cat, y), build_a1(cat, x)))
    if n_keys != len(prin):
        return False, {"principal": len(prin), "entries": n_keys}
    return True, {"dimension": len(prin)}


def verify_phi(cat: RegularCategory, nu: DegreeFunction, bound: int, mu: Optional[Measure] = None,
               method: str = "auto", budget: int = DEFAULT_BUDGET, objects=None) -> Report:
    """Phi([B] o [A]) = Phi([B]) o Phi([A]) for every pair of basis relations
    between principal objects within bound, plus unitriangularity."""
    mu = _mu_for(nu, mu)
    rep = Report("phi-verify", cat.describe(), bound)
    rep.stats.update(degree=nu.name, measure=mu.name)
    objs = objects if objects is not None else cat.objects(bound, principal=True)
    if method == "auto":
        if isinstance(cat, GSetCategory) and signature_weight(mu) is not None:
            method = "kernel"
        elif isinstance(cat, OpFinSetCategory):
            method = "partitions"
        else:
            method = "generic"
    rep.stats["method"] = method
    for y in objs:
        for x in objs:
            ok, info = unitriangular_check(cat, y, x)
            if not ok:
                rep.fail(reason="basis change not unitriangular", Y=cat.object_json(y),
                         X=cat.object_json(x), **info)
    pairs = 0
    for z, y, x in iproduct(objs, objs, objs):
        if method == "kernel":
            n = _verify_triple_kernel(cat, nu, mu, z, y, x, rep, budget)
        elif method == "partitions":
            n = _verify_triple_partitions(cat, nu, mu, z, y, x, rep)
        else:
            n = _verify_triple_generic(cat, nu, mu, z, y, x, rep)
        pairs += n
    rep.stats["pairs"] = pairs
    return rep


def _verify_triple_generic(cat, nu, mu, z, y, x, rep) -> int:
    ring = mu.ring
    n = 0
    for bsub in cat.principal_subobjects(cat.product(z, y).obj):
        bm = KnopMor(y, z, {bsub: ring.one()}, ring)
        pb = phi_morphisms(cat, bm)
        for asub in cat.principal_subobjects(cat.product(y, x).obj):
            n += 1
            am = KnopMor(x, y, {asub: ring.one()}, ring)
            lhs = phi_morphisms(cat, knop_compose(cat, nu, bm, am))
            rhs = perm_compose(cat, mu, pb, phi_morphisms(cat, am))
            if lhs != rhs:
                rep.fail(reason="composition not preserved", Z=cat.object_json(z), Y=cat.object_json(y),
                         X=cat.object_json(x), B=cat.sub_json(bsub), A=cat.sub_json(asub))
    return n


def _orbit_index(obj) -> dict:
    return {p: k for k, orb in enumerate(obj.orbits) for p in orb}


def _kernel_cost(t, zy_above) -> int:
    # sum over b of prod over its orbits of 2^c = prod (1 + 2^c)
    out = 1
    for c in zy_above:
        out *= 1 + (1 << c)
    return out


def _verify_triple_kernel(cat: GSetCategory, nu, mu, z, y, x, rep, budget) -> int:
    t = cat.ternary(z, y, x)
    zyx, zy, yx, zx = t.obj, t.zy.obj, t.yx.obj, t.zx.obj
    i_zy, i_yx, i_zx = _orbit_index(zy), _orbit_index(yx), _orbit_index(zx)
    n23, n13 = yx.rho, zx.rho
    above: list[list[int]] = [[] for _ in range(zy.rho)]
    o23 = np.zeros(zyx.rho, dtype=np.int64)
    o13 = np.zeros(zyx.rho, dtype=np.int64)
    for k, orb in enumerate(zyx.orbits):
        p = orb[0]
        above[i_zy[t.p12.table[p]]].append(k)
        o23[k] = i_yx[t.p23.table[p]]
        o13[k] = i_zx[t.p13.table[p]]
    cost = _kernel_cost(t, [len(a) for a in above])
    label = {"Z": cat.object_json(z), "Y": cat.object_json(y), "X": cat.object_json(x)}
    if cost > budget or n23 > 20 or n13 > 20:
        rep.incomplete.append(dict(label, reason="enumeration budget exceeded", cost=cost, budget=budget))
        return 0
    above_ptr = np.zeros(zy.rho + 1, dtype=np.int64)
    for k, a in enumerate(above):
        above_ptr[k + 1] = above_ptr[k] + len(a)
    above_idx = np.array([o for a in above for o in a], dtype=np.int64)
    cmax = max(np.bincount(o13, minlength=n13).max(), 1)
    base = n13 + 1
    pw = np.array([base ** c for c in range(cmax)], dtype=np.int64)
    wfun = signature_weight(mu)
    wtable = np.zeros(base ** cmax, dtype=np.int64)
    for hist in iproduct(range(n13 + 1), repeat=cmax):
        if sum(hist) == 0 or sum(hist) > n13:
            continue
        counts = [c + 1 for c, h in enumerate(hist) for _ in range(h)]
        w = Fraction(wfun(counts))
        if w.denominator != 1:
            raise DomainError("kernel path needs integral weights")
        wtable[sum(h * pw[c] for c, h in enumerate(hist))] = int(w)

    def orbit_mask(sub, idx):
        m = 0
        for p in range(sub.ambient.points):
            if (sub.key >> p) & 1:
                m |= 1 << idx[p]
        return m

    a_subs = cat.principal_subobjects(yx)
    a_masks = np.array([orbit_mask(a, i_yx) for a in a_subs], dtype=np.int64)
    kmasks = np.arange(1 << n13, dtype=np.int64)
    # o12 of each triple orbit, for the mask form of the composite
    o12 = np.zeros(zyx.rho, dtype=np.int64)
    for k, a in enumerate(above):
        o12[a] = k
    over_a = ((a_masks[:, None] >> o23[None, :]) & 1).astype(bool)
    bit13 = np.int64(1) << o13
    n = 0
    for bsub in cat.principal_subobjects(zy):
        bm = orbit_mask(bsub, i_zy)
        b_orbits = np.array([o for o in range(zy.rho) if (bm >> o) & 1], dtype=np.int64)
        r = kernels.phi_accumulate(b_orbits, above_ptr, above_idx, o23, o13, n23, n13, pw, wtable)
        rows = r[a_masks]
        if nu.trivial:
            # with nu = 1 the composite is [C] for C = p13(T), T = p12^-1 B cap p23^-1 A
            in_t = over_a & (((np.int64(bm) >> o12) & 1).astype(bool))[None, :]
            cms = np.bitwise_or.reduce(np.where(in_t, bit13[None, :], 0), axis=1)
            expected = ((kmasks[None, :] & ~cms[:, None]) == 0).astype(np.int64)
            expected[:, 0] = 0
        else:
            expected = np.zeros_like(rows)
            for ai, asub in enumerate(a_subs):
                res = compose_basis(cat, nu, z, y, x, bsub, asub)
                if res is None:
                    continue
                c, coef = res
                coef = Fraction(coef)
                if coef.denominator != 1:
                    raise DomainError("kernel path needs integral coefficients")
                inside = (kmasks & ~np.int64(orbit_mask(c, i_zx))) == 0
                inside[0] = False
                expected[ai, inside] = int(coef)
        n += len(a_subs)
        for ai in np.nonzero((rows != expected).any(axis=1))[0]:
            bad = int(np.nonzero(rows[ai] != expected[ai])[0][0])
            rep.fail(reason="composition not preserved", B=cat.sub_json(bsub), A=cat.sub_json(a_subs[ai]),
                     orbit_mask=bad, lhs=int(expected[ai, bad]), rhs=int(rows[ai, bad]), **label)
    return n


def _verify_triple_partitions(cat: OpFinSetCategory, nu, mu, z, y, x, rep) -> int:
    """RC-B: Phi(B) o Phi(A) at C sums mu(D -> C) over D <= B x_Y A with p13(D) = C."""
    ring = mu.ring
    zero = ring.zero()
    t = cat.ternary(z, y, x)
    zyx, zx = t.obj, t.zx.obj
    zx_subs = cat.subobjects(zx)
    p13 = t.p13.table
    weights: dict = {}
    memo: dict = {}
    down: dict = {}

    def weight(blocks, part, nc):
        key = (len(part), nc)
        w = weights.get(key)
        if w is None:
            # surjections between sets of equal sizes are isomorphic arrows
            d = cat.sub(zyx, [[p for bi in grp for p in blocks[bi]] for grp in part])
            _, dmono = cat.materialize(d)
            e, _ = cat.image(cat.compose(t.p13, dmono))
            w = mu.value(e)
            weights[key] = w
        return w

    def rhs(top: Subobject) -> dict:
        hit = memo.get(top.key)
        if hit is not None:
            return hit
        blocks = top.key
        where = {p: i for i, b in enumerate(blocks) for p in b}
        # the Z + X points seen by each block; the image is the restriction
        outer = [[] for _ in blocks]
        for q, v in enumerate(p13):
            outer[where[v]].append(q)
        out: dict = {}
        for part in set_partitions(len(blocks)):
            groups = [[q for bi in grp for q in outer[bi]] for grp in part]
            c = _canon_partition(groups)
            out[c] = out.get(c, zero) + weight(blocks, part, len(c))
        out = {k: v for k, v in out.items() if v != zero}
        memo[top.key] = out
        return out

    def below(c0) -> dict:
        hit = down.get(c0.key)
        if hit is None:
            hit = down[c0.key] = [c.key for c in zx_subs if cat.leq(c, c0)]
        return hit

    label = {"Z": cat.object_json(z), "Y": cat.object_json(y), "X": cat.object_json(x)}
    a_pre = [(asub, cat.preimage(t.p23, asub)) for asub in cat.principal_subobjects(t.yx.obj)]
    n = 0
    for bsub in cat.principal_subobjects(t.zy.obj):
        pb = cat.preimage(t.p12, bsub)
        for asub, pa in a_pre:
            n += 1
            got = rhs(cat.meet(pb, pa))
            res = compose_basis(cat, nu, z, y, x, bsub, asub)
            want = {}
            if res is not None:
                c0, coef = res
                if coef != zero:
                    want = {c: coef for c in below(c0)}
            if got != want:
                rep.fail(reason="composition not preserved", B=cat.sub_json(bsub), A=cat.sub_json(asub),
                         **label)
    return n


# ---------------------------------------------------------------------------
# nilpotents of non-zero trace

def end_basis(cat: RegularCategory, x: CObject) -> list:
    return orbit_keys(cat, x, x)


def _unit_matrix(x, key, ring):
    return PermMatrix(x, x, {key: ring.one()}, ring)


def structure_constants(cat: RegularCategory, mu: Measure, x: CObject):
    """basis, and c[p][q] = coordinates of e_p o e_q."""
    basis = end_basis(cat, x)
    pos = {k: n for n, k in enumerate(basis)}
    ring = mu.ring
    units = [_unit_matrix(x, k, ring) for k in basis]
    table = []
    for ep in units:
        row = []
        for eq in units:
            prod = perm_compose(cat, mu, ep, eq)
            vec = [ring.zero()] * len(basis)
            for k, v in prod.entries.items():
                vec[pos[k]] = v
            row.append(vec)
        table.append(row)
    return basis, table


def _nullspace(rows, ncols: int) -> list:
    """Rational null space of a matrix given as rows of integers or Fractions."""
    from sympy import QQ
    from sympy.polys.matrices import DomainMatrix
    rows = [list(r) for r in rows]
    if not rows:
        return [[Fraction(int(i == k)) for i in range(ncols)] for k in range(ncols)]
    m = DomainMatrix([[QQ(int(Fraction(v).numerator), int(Fraction(v).denominator)) for v in r]
                      for r in rows], (len(rows), ncols), QQ)
    ns = m.nullspace().to_Matrix()
    return [[Fraction(int(v.p), int(v.q)) for v in ns.row(k)] for k in range(ns.rows)]


def matrix_power_zero(cat, mu, m: PermMatrix, limit: int) -> Optional[int]:
    """Smallest n <= limit with m^n = 0, else None."""
    p = m
    for n in range(1, limit + 1):
        if not p.entries:
            return n
        p = perm_compose(cat, mu, p, m)
    return None


def _a1_base(cat: RegularCategory, x: CObject):
    """X when x is A1(X) as built by build_a1, else None."""
    origins = x.origins
    if not origins or not all(isinstance(s, Subobject) for s in origins):
        return None
    base = origins[0].ambient
    try:
        if build_a1(cat, base) is x or build_a1(cat, base) == x:
            return base
    except DomainError:
        return None
    return None


def _trace_form_monomial(idx: np.ndarray, coef: np.ndarray) -> np.ndarray:
    """tr(L_p L_q) when e_p e_q = coef[p, q] e_idx[p, q] (idx -1 for zero)."""
    d = idx.shape[0]
    form = np.zeros((d, d), dtype=coef.dtype)
    svec = np.arange(d)
    for q in range(d):
        j = idx[q]
        ok = j >= 0
        if not ok.any():
            continue
        js, ss = j[ok], svec[ok]
        hit = idx[:, js] == ss[None, :]
        form[:, q] = (np.where(hit, coef[:, js], 0) * coef[q, ok][None, :]).sum(axis=1)
    return form


def _pick_witness(radical: list, tau: list) -> Optional[list]:
    best = None
    for vec in radical:
        if sum(Fraction(a) * b for a, b in zip(vec, tau)) == 0:
            continue
        if best is None or sum(1 for v in vec if v) < sum(1 for v in best if v):
            best = vec
    if best is None and radical:
        # tau vanishes on a spanning set, hence on the whole radical
        return None
    return best


def _nilpotent_via_relations(cat, mu, x, base, search_bound):
    """Work in End([X]) of the relation category, where products of basis
    relations are single relations; transport the witness through Phi."""
    from .measures import recover_degree
    ring = mu.ring
    nu = mu.nu if isinstance(mu, DerivedMeasure) else recover_degree(mu)
    basis = cat.principal_subobjects(cat.product(base, base).obj)
    d = len(basis)
    info: dict = {"dimension": d, "route": "relations"}
    if d > search_bound:
        info.update(exhausted=False, reason="algebra dimension exceeds search bound")
        return None, info
    pos = {s: k for k, s in enumerate(basis)}
    idx = np.full((d, d), -1, dtype=np.int64)
    coefs = [[0] * d for _ in range(d)]
    integral = True
    for p_, bs in enumerate(basis):
        for q, as_ in enumerate(basis):
            r = compose_basis(cat, nu, base, base, base, bs, as_)
            if r is None:
                continue
            c = Fraction(ring.coerce(r[1]))
            idx[p_, q] = pos[r[0]]
            coefs[p_][q] = c
            integral = integral and c.denominator == 1
    if integral:
        coef = np.array([[int(c) for c in row] for row in coefs], dtype=np.int64)
    else:
        coef = np.array(coefs, dtype=object)
    form = _trace_form_monomial(idx, coef)
    radical = _nullspace(form.tolist(), d)
    info["radical_dimension"] = len(radical)
    tau = [Fraction(trace(cat, mu, phi_morphisms(cat, KnopMor(base, base, {s: ring.one()}, ring)))) for s in basis]
    vec = _pick_witness(radical, tau)
    if vec is None:
        info["exhausted"] = True
        return None, info
    m = phi_morphisms(cat, KnopMor(base, base, {basis[k]: ring.coerce(v) for k, v in enumerate(vec) if v}, ring))
    n = matrix_power_zero(cat, mu, m, d + 1)
    tr = trace(cat, mu, m)
    if n is None or tr == ring.zero():
        raise DomainError("radical element failed verification")
    info.update(exhausted=False, nilpotency=n, trace=ring.fmt(tr), support=len(m.entries))
    return m, info


def _nilpotent_via_perm(cat, mu, x, search_bound):
    ring = mu.ring
    basis, table = structure_constants(cat, mu, x) if len(end_basis(cat, x)) <= search_bound else ([], [])
    d = len(end_basis(cat, x))
    info: dict = {"dimension": d, "route": "matrices"}
    if d > search_bound:
        info.update(exhausted=False, reason="algebra dimension exceeds search bound")
        return None, info
    # left multiplication matrices L_p[r][q] = coord r of e_p e_q
    lmats = [[[table[p][q][r] for q in range(d)] for r in range(d)] for p in range(d)]

    def tr_prod(p, q):
        acc = Fraction(0)
        for r in range(d):
            for s in range(d):
                acc += Fraction(lmats[p][r][s]) * Fraction(lmats[q][s][r])
        return acc

    form = [[tr_prod(p, q) for q in range(d)] for p in range(d)]
    radical = _nullspace(form, d)
    info["radical_dimension"] = len(radical)
    tau = [Fraction(trace(cat, mu, _unit_matrix(x, k, ring))) for k in basis]
    vec = _pick_witness(radical, tau)
    if vec is None:
        info["exhausted"] = True
        return None, info
    m = PermMatrix(x, x, {basis[k]: ring.coerce(v) for k, v in enumerate(vec) if v}, ring)
    n = matrix_power_zero(cat, mu, m, d + 1)
    tr = trace(cat, mu, m)
    if n is None or tr == ring.zero():
        raise DomainError("radical element failed verification")
    info.update(exhausted=False, nilpotency=n, trace=ring.fmt(tr), support=len(m.entries))
    return m, info


def find_nilpotent_nonzero_trace(cat: RegularCategory, mu: Measure, x: CObject, search_bound: int = 1024):
    """Search End(Vec_x) for a nilpotent M with tr(M) != 0.

    Over Q the Jacobson radical of a finite-dimensional algebra is the kernel
    of its regular trace form, and radical elements are nilpotent. The
    categorical trace is a linear functional; it is non-zero somewhere on the
    radical exactly when it is non-zero on one of the radical basis vectors.
    So the search is complete: ``exhausted`` in the info means no nilpotent
    radical element has non-zero trace. Since the trace satisfies
    tr(MN) = tr(NM), it also vanishes on every nilpotent when the radical is 0.

    A returned witness is re-verified in the matrix category: its powers are
    computed there until zero and its trace is recomputed. Returns
    (matrix or None, info).
    """
    if mu.ring.name != "rational":
        raise DomainError("the radical is computed over Q; pick a measure with rational values")
    base = _a1_base(cat, x)
    if base is not None:
        return _nilpotent_via_relations(cat, mu, x, base, search_bound)
    return _nilpotent_via_perm(cat, mu, x, search_bound)


# ---------------------------------------------------------------------------
# comparison with partition diagrams

def compare_with_deligne(cat: OpFinSetCategory, nu: DegreeFunction, max_layer: int) -> Report:
    """knop_compose against diagram stacking on every composable pair."""
    from .deligne import deligne_compose, diagram_from_relation
    from .rings import Poly
    rep = Report("deligne-compare", cat.describe(), max_layer)
    objs = cat.objects(max_layer)
    n = singleton = 0
    for z, y, x in iproduct(objs, objs, objs):
        zx = cat.product(z, x).obj
        for bsub in cat.subobjects(cat.product(z, y).obj):
            db = diagram_from_relation(cat, bsub, z.size, y.size)
            for asub in cat.subobjects(cat.product(y, x).obj):
                n += 1
                da = diagram_from_relation(cat, asub, y.size, x.size)
                e, dc = deligne_compose(db, da)
                want = {cat.sub(zx, [[i if r == "t" else z.size + i for r, i in b] for b in dc.blocks]):
                        Poly.t(e)}
                got = knop_compose(cat, nu, KnopMor(y, z, {bsub: nu.ring.one()}, nu.ring),
                                   KnopMor(x, y, {asub: nu.ring.one()}, nu.ring)).terms
                if got != want:
                    rep.fail(B=cat.sub_json(bsub), A=cat.sub_json(asub),
                             knop={cat.sub_json(k)["blocks"].__repr__(): nu.ring.fmt(v) for k, v in got.items()},
                             deligne={"exponent": e, "blocks": [list(map(list, b)) for b in dc.blocks]})
                if z.size == y.size == x.size == 1 and len(bsub.key) == 2 and len(asub.key) == 2:
                    singleton += 1
                    rep.stats["singleton_coefficient"] = nu.ring.fmt(next(iter(got.values())))
    rep.stats.update(pairs=n, singleton_cases=singleton)
    return rep
