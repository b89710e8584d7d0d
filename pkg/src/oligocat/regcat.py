"""Regular categories: finite G-sets (RC-A) and the opposite of finite sets (RC-B).

Both instances share one interface so the measure, atom and tensor layers
never branch on the instance. Subobjects are stored in canonical form:

* RC-A: an int bitmask over the points (always a union of orbits);
* RC-B: a set partition of the underlying set, blocks as sorted tuples
  ordered by least element. S <= S' means S is coarser than S'.

A relation from X to Y is a subobject of the product Y x X (target first).
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations_with_replacement, permutations, product as iproduct
from typing import Any, Optional, Sequence

from .errors import DomainError, InstanceMismatchError, SizeLimitError
from .groups import GSet, PermGroup, disjoint_union, equivariant_maps, transitive_gsets, trivial_gset

RCA_POINT_BOUND = 12
RCB_ELEMENT_BOUND = 7
MAX_ENUM_ORBITS = 24
MAX_ENUM_ELEMENTS = 9


@dataclass(frozen=True)
class FinSet:
    """Object of RC-B: a finite set with string labels."""
    labels: tuple[str, ...]

    @classmethod
    def of_size(cls, n: int) -> "FinSet":
        return cls(tuple(str(i) for i in range(n)))

    @property
    def size(self) -> int:
        return len(self.labels)

    def __repr__(self):
        return "{" + ",".join(self.labels) + "}"


@dataclass(frozen=True)
class Mor:
    """A morphism source -> target.

    RC-A: ``table[x]`` is the image of source point x.
    RC-B: ``table[y]`` is a source element for each target element y
    (a set map in the reversed direction).
    """
    source: Any
    target: Any
    table: tuple[int, ...]


@dataclass(frozen=True)
class Subobject:
    ambient: Any
    key: Any

    def __repr__(self):
        return f"Sub({self.key!r})"


@dataclass(frozen=True)
class Product:
    obj: Any
    factors: tuple
    projections: tuple[Mor, ...]


@dataclass(frozen=True)
class FiberProduct:
    obj: Any
    p1: Mor
    p2: Mor
    sub: Subobject          # subobject of the binary product
    product: Product


@dataclass(frozen=True)
class Relation:
    """A relation from ``source`` X to ``target`` Y: a subobject of Y x X."""
    source: Any
    target: Any
    sub: Subobject


@dataclass(frozen=True)
class Ternary:
    """Z x Y x X with the three binary products and projections onto them."""
    obj: Any
    zyx: Product
    zy: Product
    yx: Product
    zx: Product
    p12: Mor
    p23: Mor
    p13: Mor


class RelComposite:
    """Result of composing relations: B o A with the data Knop composition needs."""

    def __init__(self, cat: "RegularCategory", rel: Relation, middle: Subobject, tern: Ternary):
        self.cat = cat
        self.rel = rel
        self.middle = middle      # B x_Y A as a subobject of Z x Y x X
        self.tern = tern

    @cached_property
    def surjection(self) -> Mor:
        """The image surjection from B x_Y A onto B o A."""
        cat = self.cat
        dobj, mono = cat.materialize(self.middle)
        e, _ = cat.image(cat.compose(self.tern.p13, mono))
        return e


class RegularCategory(ABC):
    kind: str

    def __init__(self):
        self._products: dict = {}
        self._subs: dict = {}
        self._mat: dict = {}
        self._tern: dict = {}

    # -- objects and morphisms -------------------------------------------
    @abstractmethod
    def final(self): ...

    @abstractmethod
    def size(self, x) -> int: ...

    @abstractmethod
    def identity(self, x) -> Mor: ...

    @abstractmethod
    def compose(self, g: Mor, f: Mor) -> Mor:
        """g o f."""

    @abstractmethod
    def terminal_map(self, x) -> Mor: ...

    @abstractmethod
    def check_object(self, x) -> None: ...

    def check_same(self, *objs):
        for x in objs:
            self.check_object(x)

    @abstractmethod
    def _product(self, objs: tuple) -> Product: ...

    def product(self, *objs) -> Product:
        """Product of the given objects with projections, memoized."""
        if len(objs) == 1 and isinstance(objs[0], (list, tuple)):
            objs = tuple(objs[0])
        self.check_same(*objs)
        p = self._products.get(objs)
        if p is None:
            p = self._product(tuple(objs))
            self._products[objs] = p
        return p

    @abstractmethod
    def pair(self, prod: Product, maps: Sequence[Mor]) -> Mor:
        """The unique map into ``prod`` with the given components."""

    @abstractmethod
    def is_surjection(self, f: Mor) -> bool: ...

    @abstractmethod
    def is_injection(self, f: Mor) -> bool: ...

    def is_iso(self, f: Mor) -> bool:
        return self.is_surjection(f) and self.is_injection(f)

    @abstractmethod
    def maps(self, x, y) -> list[Mor]:
        """All morphisms x -> y."""

    def surjections(self, y, x) -> list[Mor]:
        return [f for f in self.maps(y, x) if self.is_surjection(f)]

    def isomorphisms(self, y, x) -> list[Mor]:
        return [f for f in self.maps(y, x) if self.is_iso(f)]

    @abstractmethod
    def objects(self, bound: int, principal: bool = True) -> list:
        """Representatives of the isomorphism classes within ``bound``."""

    # -- subobjects ---------------------------------------------------------
    @abstractmethod
    def _subobject_keys(self, x) -> list: ...

    def subobjects(self, x) -> list[Subobject]:
        """All subobjects of x in a fixed linear extension of the order."""
        s = self._subs.get(x)
        if s is None:
            s = [Subobject(x, k) for k in self._subobject_keys(x)]
            self._subs[x] = s
        return s

    @abstractmethod
    def top(self, x) -> Subobject: ...

    @abstractmethod
    def bottom(self, x) -> Subobject: ...

    @abstractmethod
    def leq(self, s: Subobject, t: Subobject) -> bool: ...

    @abstractmethod
    def meet(self, s: Subobject, t: Subobject) -> Subobject: ...

    @abstractmethod
    def preimage(self, f: Mor, s: Subobject) -> Subobject: ...

    @abstractmethod
    def image_of_sub(self, f: Mor, s: Subobject) -> Subobject:
        """Image of the composite S -> source(f) -> target(f)."""

    @abstractmethod
    def _materialize(self, s: Subobject) -> tuple[Any, Mor]: ...

    def materialize(self, s: Subobject) -> tuple[Any, Mor]:
        """The subobject as an object together with its mono into the ambient."""
        r = self._mat.get(s)
        if r is None:
            r = self._materialize(s)
            self._mat[s] = r
        return r

    @abstractmethod
    def image(self, f: Mor) -> tuple[Mor, Subobject]:
        """Factor f as mono o e; returns (e onto the image object, image)."""

    @abstractmethod
    def fiber_product(self, f: Mor, g: Mor) -> FiberProduct: ...

    # -- types --------------------------------------------------------------
    def types(self) -> list[Subobject]:
        """Lambda: the subobjects of the final object."""
        return self.subobjects(self.final())

    def type_of(self, x) -> Subobject:
        return self.image(self.terminal_map(x))[1]

    def is_principal(self, x) -> bool:
        return self.type_of(x) == self.top(self.final())

    def principal_subobjects(self, x) -> list[Subobject]:
        return [s for s in self.subobjects(x) if self.is_principal(self.materialize(s)[0])]

    # -- derived constructions ---------------------------------------------
    def base_change(self, f: Mor, g: Mor) -> tuple[Mor, FiberProduct]:
        """Base change of f: Y -> X along g: X' -> X, as Y x_X X' -> X'."""
        fp = self.fiber_product(f, g)
        return fp.p2, fp

    def ample_subobjects(self, obj, legs: Sequence[Mor]) -> list[Subobject]:
        """Subobjects W of obj whose composite with every leg is surjective."""
        tops = [self.top(l.target) for l in legs]
        return [w for w in self.subobjects(obj)
                if all(self.image_of_sub(l, w) == t for l, t in zip(legs, tops))]

    def ample_of_product(self, prod: Product) -> list[Subobject]:
        return self.ample_subobjects(prod.obj, prod.projections)

    def ternary(self, z, y, x) -> Ternary:
        key = (z, y, x)
        t = self._tern.get(key)
        if t is None:
            zyx = self.product(z, y, x)
            zy, yx, zx = self.product(z, y), self.product(y, x), self.product(z, x)
            pz, py, px = zyx.projections
            t = Ternary(zyx.obj, zyx, zy, yx, zx,
                        self.pair(zy, [pz, py]), self.pair(yx, [py, px]), self.pair(zx, [pz, px]))
            self._tern[key] = t
        return t

    def diagonal(self, x) -> Subobject:
        xx = self.product(x, x)
        i = self.identity(x)
        return self.image(self.pair(xx, [i, i]))[1]

    def graph(self, f: Mor) -> Relation:
        """The graph of f: X -> Y as a relation from X to Y."""
        yx = self.product(f.target, f.source)
        return Relation(f.source, f.target, self.image(self.pair(yx, [f, self.identity(f.source)]))[1])

    def identity_relation(self, x) -> Relation:
        return Relation(x, x, self.diagonal(x))

    def relation(self, source, target, sub: Subobject) -> Relation:
        if sub.ambient != self.product(target, source).obj:
            raise InstanceMismatchError("relation subobject must live in target x source")
        return Relation(source, target, sub)

    def compose_rel(self, b: Relation, a: Relation) -> RelComposite:
        """B o A = image of B x_Y A in Z x X, computed inside Z x Y x X."""
        if a.target != b.source:
            raise InstanceMismatchError("middle objects differ")
        z, y, x = b.target, b.source, a.source
        t = self.ternary(z, y, x)
        d = self.meet(self.preimage(t.p12, b.sub), self.preimage(t.p23, a.sub))
        c = self.image_of_sub(t.p13, d)
        return RelComposite(self, Relation(x, z, c), d, t)

    def transpose(self, a: Relation) -> Relation:
        yx = self.product(a.target, a.source)
        xy = self.product(a.source, a.target)
        py, px = yx.projections
        swap = self.pair(xy, [px, py])
        return Relation(a.target, a.source, self.image_of_sub(swap, a.sub))

    def is_equivalence_relation(self, r: Relation) -> bool:
        if r.source != r.target:
            raise DomainError("equivalence relations are square")
        x = r.source
        if not self.leq(self.diagonal(x), r.sub):
            return False
        if self.transpose(r) != r:
            return False
        return self.leq(self.compose_rel(r, r).rel.sub, r.sub)

    def kernel_pair(self, f: Mor) -> Relation:
        fp = self.fiber_product(f, f)
        return Relation(f.source, f.source, fp.sub)

    # -- serialization --------------------------------------------------------
    @abstractmethod
    def object_json(self, x) -> dict: ...

    @abstractmethod
    def sub_json(self, s: Subobject) -> dict: ...

    @abstractmethod
    def describe(self) -> dict: ...


def _popcount(m: int) -> int:
    return bin(m).count("1")


def _bits(m: int):
    i = 0
    while m:
        if m & 1:
            yield i
        m >>= 1
        i += 1


class GSetCategory(RegularCategory):
    """RC-A: finite G-sets over a fixed finite permutation group."""
    kind = "fin-gset"

    def __init__(self, group: PermGroup, point_bound: int = RCA_POINT_BOUND):
        super().__init__()
        self.group = group
        self.point_bound = point_bound
        self._final = trivial_gset(group, 1)

    def __repr__(self):
        return f"GSetCategory(order={self.group.order})"

    def describe(self):
        return {"kind": self.kind, "group": {"degree": self.group.degree,
                                             "generators": [g.cycles() for g in self.group.generators]}}

    def final(self):
        return self._final

    def size(self, x: GSet) -> int:
        return x.points

    def check_object(self, x):
        if not isinstance(x, GSet) or x.group != self.group:
            raise InstanceMismatchError(f"{x!r} is not a G-set of this instance")

    def identity(self, x):
        return Mor(x, x, tuple(range(x.points)))

    def compose(self, g, f):
        if f.target != g.source:
            raise InstanceMismatchError("composition of non-composable maps")
        gt = g.table
        return Mor(f.source, g.target, tuple(gt[i] for i in f.table))

    def terminal_map(self, x):
        return Mor(x, self._final, (0,) * x.points)

    def gmap(self, source: GSet, target: GSet, table) -> Mor:
        from .groups import GMap
        GMap(source, target, tuple(table))  # validates equivariance
        return Mor(source, target, tuple(table))

    def _product(self, objs):
        sizes = [x.points for x in objs]
        strides = []
        acc = 1
        for n in reversed(sizes):
            strides.append(acc)
            acc *= n
        strides.reverse()
        total = acc
        tuples = list(iproduct(*[range(n) for n in sizes]))
        acts = []
        for k in range(len(self.group.generators)):
            acts.append(tuple(sum(objs[i].action[k][c[i]] * strides[i] for i in range(len(objs)))
                              for c in tuples))
        obj = GSet(self.group, total, tuple(acts))
        projs = tuple(Mor(obj, objs[i], tuple(c[i] for c in tuples)) for i in range(len(objs)))
        return Product(obj, tuple(objs), projs)

    def pair(self, prod, maps):
        if len(maps) != len(prod.factors):
            raise InstanceMismatchError("wrong number of components")
        src = maps[0].source
        sizes = [x.points for x in prod.factors]
        strides = []
        acc = 1
        for n in reversed(sizes):
            strides.append(acc)
            acc *= n
        strides.reverse()
        table = tuple(sum(m.table[w] * s for m, s in zip(maps, strides)) for w in range(src.points))
        return Mor(src, prod.obj, table)

    def is_surjection(self, f):
        return len(set(f.table)) == f.target.points

    def is_injection(self, f):
        return len(set(f.table)) == len(f.table)

    def maps(self, x, y):
        return [Mor(x, y, t) for t in equivariant_maps(x, y)]

    def objects(self, bound, principal=True):
        trans = transitive_gsets(self.group, bound)
        out = [] if principal else [trivial_gset(self.group, 0)]
        for total in range(1, bound + 1):
            for r in range(1, total + 1):
                for combo in combinations_with_replacement(range(len(trans)), r):
                    if sum(trans[i].points for i in combo) == total:
                        out.append(disjoint_union([trans[i] for i in combo]))
        return out

    # subobjects: bitmasks over points
    def orbit_masks(self, x: GSet) -> list[int]:
        return [sum(1 << p for p in orb) for orb in x.orbits]

    def _subobject_keys(self, x):
        om = self.orbit_masks(x)
        if len(om) > MAX_ENUM_ORBITS:
            raise SizeLimitError(f"{len(om)} orbits: too many subobjects to enumerate")
        keys = []
        for sel in range(1 << len(om)):
            m = 0
            for i in _bits(sel):
                m |= om[i]
            keys.append((_popcount(sel), m))
        keys.sort()
        return [m for _, m in keys]

    def sub(self, x: GSet, points) -> Subobject:
        m = 0
        for p in points:
            m |= 1 << p
        s = Subobject(x, m)
        self._check_stable(s)
        return s

    def _check_stable(self, s):
        x = s.ambient
        for a in x.action:
            for p in _bits(s.key):
                if not (s.key >> a[p]) & 1:
                    raise DomainError("subset is not G-stable")

    def top(self, x):
        return Subobject(x, (1 << x.points) - 1)

    def bottom(self, x):
        return Subobject(x, 0)

    def leq(self, s, t):
        return s.key & ~t.key == 0

    def meet(self, s, t):
        return Subobject(s.ambient, s.key & t.key)

    def join(self, s, t):
        return Subobject(s.ambient, s.key | t.key)

    def preimage(self, f, s):
        k = s.key
        m = 0
        for w, v in enumerate(f.table):
            if (k >> v) & 1:
                m |= 1 << w
        return Subobject(f.source, m)

    def image_of_sub(self, f, s):
        m = 0
        tb = f.table
        for p in _bits(s.key):
            m |= 1 << tb[p]
        return Subobject(f.target, m)

    def _materialize(self, s):
        x = s.ambient
        pts = list(_bits(s.key))
        pos = {p: i for i, p in enumerate(pts)}
        act = tuple(tuple(pos[a[p]] for p in pts) for a in x.action)
        obj = GSet(self.group, len(pts), act)
        return obj, Mor(obj, x, tuple(pts))

    def image(self, f):
        s = self.image_of_sub(f, self.top(f.source))
        obj, mono = self.materialize(s)
        pos = {p: i for i, p in enumerate(mono.table)}
        return Mor(f.source, obj, tuple(pos[v] for v in f.table)), s

    def fiber_product(self, f, g):
        if f.target != g.target:
            raise InstanceMismatchError("fiber product needs a common codomain")
        prod = self.product(f.source, g.source)
        ny = g.source.points
        m = 0
        for a, fa in enumerate(f.table):
            for b, gb in enumerate(g.table):
                if fa == gb:
                    m |= 1 << (a * ny + b)
        sub = Subobject(prod.obj, m)
        obj, mono = self.materialize(sub)
        p1 = self.compose(prod.projections[0], mono)
        p2 = self.compose(prod.projections[1], mono)
        return FiberProduct(obj, p1, p2, sub, prod)

    def quotient(self, x: GSet, blocks: Sequence[Sequence[int]]) -> Mor:
        """The quotient map for a G-stable partition of the points."""
        where = {}
        blocks = sorted((tuple(sorted(b)) for b in blocks), key=lambda b: b[0])
        for i, b in enumerate(blocks):
            for p in b:
                where[p] = i
        acts = []
        for a in x.action:
            img = []
            for b in blocks:
                targets = {where[a[p]] for p in b}
                if len(targets) != 1:
                    raise DomainError("partition is not G-stable")
                img.append(targets.pop())
            acts.append(tuple(img))
        q = GSet(self.group, len(blocks), tuple(acts))
        return Mor(x, q, tuple(where[p] for p in range(x.points)))

    def object_json(self, x):
        return {"points": x.points, "action": [list(a) for a in x.action]}

    def sub_json(self, s):
        return {"points": list(_bits(s.key))}


def _canon_partition(blocks) -> tuple[tuple[int, ...], ...]:
    bs = [tuple(sorted(b)) for b in blocks if b]
    bs.sort(key=lambda b: b[0])
    return tuple(bs)


def _block_index(part, n: int) -> list[int]:
    out = [0] * n
    for i, b in enumerate(part):
        for p in b:
            out[p] = i
    return out


def _uf_partition(n: int, pairs) -> tuple[tuple[int, ...], ...]:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb
    blocks: dict[int, list[int]] = {}
    for p in range(n):
        blocks.setdefault(find(p), []).append(p)
    return tuple(tuple(b) for _, b in sorted(blocks.items()))


def set_partitions(n: int) -> list[tuple[tuple[int, ...], ...]]:
    """All partitions of range(n) in canonical form (restricted growth order)."""
    out = []
    rgs = [0] * n

    def rec(i, m):
        if i == n:
            blocks: list[list[int]] = [[] for _ in range(m)]
            for p, b in enumerate(rgs):
                blocks[b].append(p)
            out.append(tuple(tuple(b) for b in blocks))
            return
        for b in range(m + 1):
            rgs[i] = b
            rec(i + 1, max(m, b + 1))

    rec(0, 0)
    return out


class OpFinSetCategory(RegularCategory):
    """RC-B: the opposite of the category of finite sets.

    The empty set is kept as the final object; every object is principal.
    """
    kind = "op-finset"

    def __init__(self, element_bound: int = RCB_ELEMENT_BOUND):
        super().__init__()
        self.element_bound = element_bound
        self._final = FinSet(())

    def __repr__(self):
        return "OpFinSetCategory()"

    def describe(self):
        return {"kind": self.kind}

    def final(self):
        return self._final

    def size(self, x: FinSet) -> int:
        return x.size

    def check_object(self, x):
        if not isinstance(x, FinSet):
            raise InstanceMismatchError(f"{x!r} is not an object of op-finset")

    def identity(self, x):
        return Mor(x, x, tuple(range(x.size)))

    def compose(self, g, f):
        if f.target != g.source:
            raise InstanceMismatchError("composition of non-composable maps")
        ft = f.table
        return Mor(f.source, g.target, tuple(ft[i] for i in g.table))

    def terminal_map(self, x):
        return Mor(x, self._final, ())

    def setmap(self, source: FinSet, target: FinSet, table) -> Mor:
        """Morphism source -> target given by a set map target -> source."""
        table = tuple(table)
        if len(table) != target.size or any(not 0 <= v < source.size for v in table):
            raise DomainError("reversed set map has wrong shape")
        return Mor(source, target, table)

    def _product(self, objs):
        labels = tuple(f"{i}.{lab}" for i, x in enumerate(objs) for lab in x.labels)
        obj = FinSet(labels)
        projs = []
        off = 0
        for x in objs:
            projs.append(Mor(obj, x, tuple(range(off, off + x.size))))
            off += x.size
        return Product(obj, tuple(objs), tuple(projs))

    def pair(self, prod, maps):
        if len(maps) != len(prod.factors):
            raise InstanceMismatchError("wrong number of components")
        table = []
        for m in maps:
            table.extend(m.table)
        return Mor(maps[0].source, prod.obj, tuple(table))

    def is_surjection(self, f):
        return len(set(f.table)) == len(f.table)

    def is_injection(self, f):
        return len(set(f.table)) == f.source.size

    def maps(self, x, y):
        return [Mor(x, y, t) for t in iproduct(range(x.size), repeat=y.size)]

    def surjections(self, y, x):
        return [Mor(y, x, t) for t in permutations(range(y.size), x.size)]

    def objects(self, bound, principal=True):
        return [FinSet.of_size(n) for n in range(0, bound + 1)]

    def _subobject_keys(self, x):
        if x.size > MAX_ENUM_ELEMENTS:
            raise SizeLimitError(f"{x.size} elements: too many partitions to enumerate")
        parts = set_partitions(x.size)
        parts.sort(key=lambda p: (len(p), p))
        return parts

    def sub(self, x: FinSet, blocks) -> Subobject:
        part = _canon_partition(blocks)
        if sorted(p for b in part for p in b) != list(range(x.size)):
            raise DomainError("blocks do not partition the set")
        return Subobject(x, part)

    def top(self, x):
        return Subobject(x, tuple((i,) for i in range(x.size)))

    def bottom(self, x):
        return Subobject(x, (tuple(range(x.size)),) if x.size else ())

    def leq(self, s, t):
        bi = _block_index(s.key, s.ambient.size)
        return all(len({bi[p] for p in b}) == 1 for b in t.key)

    def meet(self, s, t):
        pairs = [(b[0], p) for b in s.key for p in b[1:]] + [(b[0], p) for b in t.key for p in b[1:]]
        return Subobject(s.ambient, _uf_partition(s.ambient.size, pairs))

    def preimage(self, f, s):
        tb = f.table
        pairs = [(tb[b[0]], tb[p]) for b in s.key for p in b[1:]]
        return Subobject(f.source, _uf_partition(f.source.size, pairs))

    def image_of_sub(self, f, s):
        bi = _block_index(s.key, f.source.size)
        groups: dict[int, list[int]] = {}
        for x, v in enumerate(f.table):
            groups.setdefault(bi[v], []).append(x)
        return Subobject(f.target, _canon_partition(groups.values()))

    def _materialize(self, s):
        x = s.ambient
        labels = tuple("{" + ",".join(x.labels[p] for p in b) + "}" for b in s.key)
        obj = FinSet(labels)
        return obj, Mor(obj, x, tuple(_block_index(s.key, x.size)))

    def image(self, f):
        s = self.image_of_sub(f, self.top(f.source))
        obj, _ = self.materialize(s)
        return Mor(f.source, obj, tuple(f.table[b[0]] for b in s.key)), s

    def fiber_product(self, f, g):
        if f.target != g.target:
            raise InstanceMismatchError("fiber product needs a common codomain")
        prod = self.product(f.source, g.source)
        off = f.source.size
        pairs = [(a, off + b) for a, b in zip(f.table, g.table)]
        sub = Subobject(prod.obj, _uf_partition(prod.obj.size, pairs))
        obj, mono = self.materialize(sub)
        p1 = self.compose(prod.projections[0], mono)
        p2 = self.compose(prod.projections[1], mono)
        return FiberProduct(obj, p1, p2, sub, prod)

    def object_json(self, x):
        return {"labels": list(x.labels)}

    def sub_json(self, s):
        return {"blocks": [[s.ambient.labels[p] for p in b] for b in s.key]}
