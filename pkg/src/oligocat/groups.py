"""Finite permutation groups, finite G-sets and equivariant maps.

Conventions: a permutation is the tuple of its images, ``(p*q)(i) = p(q(i))``
and actions are left actions, so ``act(g*h, x) = act(g, act(h, x))``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

from .errors import DomainError, InstanceMismatchError, SizeLimitError

GROUP_DEGREE_BOUND = 10
AUT_POINT_BOUND = 12


class Permutation(tuple):
    """Bijection of {0..n-1} stored as its image tuple."""

    def __new__(cls, images: Iterable[int]):
        t = tuple.__new__(cls, (int(i) for i in images))
        if sorted(t) != list(range(len(t))):
            raise DomainError(f"{tuple(t)} is not a permutation")
        return t

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return tuple.__new__(cls, range(n))

    @classmethod
    def from_cycles(cls, n: int, cycles: Sequence[Sequence[int]]) -> "Permutation":
        img = list(range(n))
        seen = set()
        for cyc in cycles:
            for a in cyc:
                if not 0 <= a < n or a in seen:
                    raise DomainError(f"bad cycle {list(cyc)} for degree {n}")
                seen.add(a)
            for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]] if cyc else []):
                img[a] = b
        return cls(img)

    @property
    def degree(self) -> int:
        return len(self)

    def __mul__(self, other: "Permutation") -> "Permutation":
        return tuple.__new__(Permutation, (self[i] for i in other))

    def inverse(self) -> "Permutation":
        inv = [0] * len(self)
        for i, j in enumerate(self):
            inv[j] = i
        return tuple.__new__(Permutation, inv)

    def cycles(self) -> list[list[int]]:
        seen, out = set(), []
        for i in range(len(self)):
            if i in seen or self[i] == i:
                continue
            cyc, j = [], i
            while j not in seen:
                seen.add(j)
                cyc.append(j)
                j = self[j]
            out.append(cyc)
        return out


def _closure(gens: Sequence[tuple], n: int) -> list[tuple]:
    ident = tuple(range(n))
    seen = {ident}
    queue = deque([ident])
    while queue:
        g = queue.popleft()
        for s in gens:
            h = tuple(s[i] for i in g)
            if h not in seen:
                seen.add(h)
                queue.append(h)
    return sorted(seen)


@dataclass(frozen=True)
class PermGroup:
    degree: int
    generators: tuple[Permutation, ...] = ()

    def __post_init__(self):
        gens = tuple(Permutation(g) for g in self.generators)
        for g in gens:
            if len(g) != self.degree:
                raise DomainError(f"generator {tuple(g)} has wrong degree")
        object.__setattr__(self, "generators", gens)

    @classmethod
    def trivial(cls, degree: int = 1) -> "PermGroup":
        return cls(degree, ())

    @classmethod
    def cyclic(cls, n: int) -> "PermGroup":
        if n == 1:
            return cls(1, ())
        return cls(n, (Permutation([(i + 1) % n for i in range(n)]),))

    @classmethod
    def symmetric(cls, n: int) -> "PermGroup":
        if n <= 1:
            return cls(max(n, 1), ())
        gens = [Permutation.from_cycles(n, [[0, 1]])]
        if n > 2:
            gens.append(Permutation([(i + 1) % n for i in range(n)]))
        return cls(n, tuple(gens))

    @classmethod
    def from_cycle_lists(cls, degree: int, gens) -> "PermGroup":
        """Generators as lists of cycles; a flat int list is one cycle."""
        out = []
        for g in gens:
            if g and all(isinstance(a, int) for a in g):
                g = [g]
            out.append(Permutation.from_cycles(degree, g))
        return cls(degree, tuple(out))

    def elements(self, bound: int = GROUP_DEGREE_BOUND) -> list[Permutation]:
        if self.degree > bound:
            raise SizeLimitError(f"group degree {self.degree} exceeds bound {bound}")
        return self._elements

    @cached_property
    def _elements(self) -> list[Permutation]:
        return [tuple.__new__(Permutation, e) for e in _closure(self.generators, self.degree)]

    @cached_property
    def index_of(self) -> dict[tuple, int]:
        return {e: i for i, e in enumerate(self._elements)}

    @property
    def order(self) -> int:
        return len(self._elements)

    def __contains__(self, p) -> bool:
        return tuple(p) in self.index_of

    def subgroups(self) -> list[frozenset]:
        """All subgroups as frozensets of elements, by growing cyclic joins."""
        elems = self._elements
        ident = elems[0]
        start = frozenset([ident])
        found = {start}
        queue = deque([start])
        while queue:
            h = queue.popleft()
            for g in elems:
                if g in h:
                    continue
                k = frozenset(_closure(list(h) + [g], self.degree))
                if k not in found:
                    found.add(k)
                    queue.append(k)
        return sorted(found, key=lambda s: (len(s), sorted(s)))

    def conjugacy_classes_of_subgroups(self) -> list[frozenset]:
        """One representative per conjugacy class, smallest canonical form."""
        elems = self._elements
        reps, seen = [], set()
        for h in self.subgroups():
            if h in seen:
                continue
            conj = set()
            for g in elems:
                gi = g.inverse()
                conj.add(frozenset(g * x * gi for x in h))
            seen |= conj
            reps.append(min(conj, key=lambda s: sorted(s)))
        return sorted(reps, key=lambda s: (-len(s), sorted(s)))


@dataclass(frozen=True)
class GSet:
    """A finite set {0..points-1} with one permutation per group generator."""
    group: PermGroup
    points: int
    action: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        act = tuple(tuple(int(i) for i in a) for a in self.action)
        if not act and self.group.generators:
            act = tuple(tuple(range(self.points)) for _ in self.group.generators)
        if len(act) != len(self.group.generators):
            raise DomainError("need one point permutation per group generator")
        for a in act:
            if sorted(a) != list(range(self.points)):
                raise DomainError(f"{a} is not a permutation of {self.points} points")
        object.__setattr__(self, "action", act)
        self._element_perms  # validates consistency eagerly

    @cached_property
    def _element_perms(self) -> list[tuple[int, ...]]:
        """Permutation of the points induced by each group element.

        Walking every Cayley-graph edge and insisting on one value per
        element is exactly the check that generators extend to a
        homomorphism.
        """
        grp = self.group
        idx = grp.index_of
        n = grp.degree
        out: list[Optional[tuple]] = [None] * grp.order
        ident = tuple(range(n))
        out[idx[ident]] = tuple(range(self.points))
        queue = deque([ident])
        while queue:
            g = queue.popleft()
            pg = out[idx[g]]
            for s, ps in zip(grp.generators, self.action):
                h = tuple(s[i] for i in g)
                ph = tuple(ps[i] for i in pg)
                j = idx[h]
                if out[j] is None:
                    out[j] = ph
                    queue.append(h)
                elif out[j] != ph:
                    raise DomainError("action does not extend consistently to the group")
        return out  # type: ignore[return-value]

    def act(self, g, x: int) -> int:
        return self._element_perms[self.group.index_of[tuple(g)]][x]

    def element_perms(self) -> list[tuple[int, ...]]:
        return self._element_perms

    @cached_property
    def orbits(self) -> tuple[tuple[int, ...], ...]:
        return orbits_of(self)

    @cached_property
    def orbit_index(self) -> tuple[int, ...]:
        out = [0] * self.points
        for k, orb in enumerate(self.orbits):
            for x in orb:
                out[x] = k
        return tuple(out)

    @property
    def rho(self) -> int:
        return len(self.orbits)

    def stabilizer(self, x: int) -> frozenset[int]:
        return frozenset(i for i, p in enumerate(self._element_perms) if p[x] == x)

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.group, self.points, self.action))
            self.__dict__["_hash"] = h
        return h

    def __repr__(self):
        return f"GSet(points={self.points}, action={list(map(list, self.action))})"


@dataclass(frozen=True)
class GMap:
    source: GSet
    target: GSet
    map: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "map", tuple(self.map))
        if self.source.group != self.target.group:
            raise InstanceMismatchError("GMap between G-sets over different groups")
        if len(self.map) != self.source.points or any(
                not 0 <= y < self.target.points for y in self.map):
            raise DomainError("GMap table has wrong shape")
        if not is_equivariant(self.source, self.target, self.map):
            raise DomainError("map is not equivariant")


def is_equivariant(x: GSet, y: GSet, table: Sequence[int]) -> bool:
    return all(ty[table[p]] == table[tx[p]]
               for tx, ty in zip(x.action, y.action) for p in range(x.points))


def orbits_of(x: GSet) -> tuple[tuple[int, ...], ...]:
    """Orbit partition, blocks sorted, ordered by least point."""
    parent = list(range(x.points))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a in x.action:
        for p, q in enumerate(a):
            rp, rq = find(p), find(q)
            if rp != rq:
                parent[max(rp, rq)] = min(rp, rq)
    blocks: dict[int, list[int]] = {}
    for p in range(x.points):
        blocks.setdefault(find(p), []).append(p)
    return tuple(tuple(b) for _, b in sorted(blocks.items()))


def trivial_gset(group: PermGroup, n: int) -> GSet:
    return GSet(group, n, tuple(tuple(range(n)) for _ in group.generators))


def regular_gset(group: PermGroup) -> GSet:
    """G acting on itself by left multiplication (points = sorted elements)."""
    elems = group.elements()
    idx = group.index_of
    act = tuple(tuple(idx[tuple(s * e)] for e in elems) for s in group.generators)
    return GSet(group, len(elems), act)


def coset_gset(group: PermGroup, sub: frozenset) -> GSet:
    """The transitive G-set G/H of left cosets, cosets ordered by least element."""
    elems = group.elements()
    cosets: list[frozenset] = []
    seen = set()
    for g in elems:
        if g in seen:
            continue
        c = frozenset(g * h for h in sub)
        seen |= c
        cosets.append(c)
    cosets.sort(key=min)
    where = {}
    for k, c in enumerate(cosets):
        for g in c:
            where[g] = k
    act = tuple(tuple(where[s * min(c)] for c in cosets) for s in group.generators)
    return GSet(group, len(cosets), act)


def transitive_gsets(group: PermGroup, max_points: Optional[int] = None) -> list[GSet]:
    """One transitive G-set per conjugacy class of subgroups, smallest first."""
    out = []
    for h in group.conjugacy_classes_of_subgroups():
        idx = group.order // len(h)
        if max_points is None or idx <= max_points:
            out.append(coset_gset(group, h))
    out.sort(key=lambda s: (s.points, s.action))
    return out


def disjoint_union(xs: Sequence[GSet]) -> GSet:
    if not xs:
        raise DomainError("need at least one G-set (use trivial_gset(G, 0) for empty)")
    grp = xs[0].group
    if any(x.group != grp for x in xs):
        raise InstanceMismatchError("G-sets over different groups")
    acts = [[] for _ in grp.generators]
    off = 0
    for x in xs:
        for k, a in enumerate(x.action):
            acts[k].extend(off + i for i in a)
        off += x.points
    return GSet(grp, off, tuple(tuple(a) for a in acts))


def extend_equivariant(x: GSet, y: GSet, r: int, t: int) -> Optional[dict[int, int]]:
    """The equivariant map on the orbit of ``r`` sending r to t, if one exists."""
    mapping: dict[int, int] = {}
    for px, py in zip(x.element_perms(), y.element_perms()):
        a, b = px[r], py[t]
        old = mapping.setdefault(a, b)
        if old != b:
            return None
    return mapping


def equivariant_maps(x: GSet, y: GSet) -> list[tuple[int, ...]]:
    """All equivariant maps x -> y as tables, in lexicographic order."""
    if x.group != y.group:
        raise InstanceMismatchError("G-sets over different groups")
    orbit_choices = []
    for orb in x.orbits:
        r = orb[0]
        opts = []
        for t in range(y.points):
            m = extend_equivariant(x, y, r, t)
            if m is not None:
                opts.append(m)
        if not opts:
            return []
        orbit_choices.append(opts)
    out = []

    def rec(k, acc):
        if k == len(orbit_choices):
            out.append(tuple(acc[p] for p in range(x.points)))
            return
        for m in orbit_choices[k]:
            acc.update(m)
            rec(k + 1, acc)

    rec(0, {})
    out.sort()
    return out


def are_isomorphic_gsets(x: GSet, y: GSet) -> Optional[tuple[int, ...]]:
    """An equivariant bijection x -> y, or None.

    Backtracks over matching orbits of equal size; within a matched pair the
    bijection is determined by the image of one representative.
    """
    if x.group != y.group:
        raise InstanceMismatchError("G-sets over different groups")
    if x.points > AUT_POINT_BOUND or y.points > AUT_POINT_BOUND:
        raise SizeLimitError("G-set too large for isomorphism search")
    if x.points != y.points or x.rho != y.rho:
        return None
    if sorted(map(len, x.orbits)) != sorted(map(len, y.orbits)):
        return None
    xo, yo = x.orbits, y.orbits
    used = [False] * len(yo)
    mapping: dict[int, int] = {}

    def rec(k):
        if k == len(xo):
            return True
        r = xo[k][0]
        for j, oy in enumerate(yo):
            if used[j] or len(oy) != len(xo[k]):
                continue
            for t in oy:
                m = extend_equivariant(x, y, r, t)
                if m is None or len(set(m.values())) != len(m):
                    continue
                used[j] = True
                mapping.update(m)
                if rec(k + 1):
                    return True
                used[j] = False
                for p in m:
                    del mapping[p]
                break  # all valid t in one orbit are interchangeable up to Aut
        return False

    if rec(0):
        return tuple(mapping[p] for p in range(x.points))
    return None


def aut_gset(x: GSet, bound: int = AUT_POINT_BOUND) -> PermGroup:
    """Aut(X) as a permutation group on the points of X.

    Generated by the automorphisms of the first orbit in each isomorphism
    class plus swaps of adjacent isomorphic orbits, which is the wreath
    product decomposition.
    """
    if x.points > bound:
        raise SizeLimitError(f"{x.points} points exceeds automorphism bound {bound}")
    n = x.points
    gens: list[Permutation] = []
    classes: list[list[int]] = []
    for k, orb in enumerate(x.orbits):
        sub_k = _orbit_gset(x, orb)
        for cl in classes:
            j = cl[0]
            if len(x.orbits[j]) == len(orb) and are_isomorphic_gsets(_orbit_gset(x, x.orbits[j]), sub_k):
                cl.append(k)
                break
        else:
            classes.append([k])
    for cl in classes:
        first = x.orbits[cl[0]]
        r = first[0]
        for t in first:
            m = extend_equivariant(x, x, r, t)
            if m is not None and len(set(m.values())) == len(m) and t != r:
                img = list(range(n))
                for a, b in m.items():
                    img[a] = b
                gens.append(Permutation(img))
        for a_k, b_k in zip(cl, cl[1:]):
            oa, ob = x.orbits[a_k], x.orbits[b_k]
            for t in ob:
                m = extend_equivariant(x, x, oa[0], t)
                if m is not None and len(set(m.values())) == len(m):
                    img = list(range(n))
                    for a, b in m.items():
                        img[a] = b
                        img[b] = a
                    gens.append(Permutation(img))
                    break
    return PermGroup(n, tuple(sorted(set(gens))))


def _orbit_gset(x: GSet, orb: Sequence[int]) -> GSet:
    pos = {p: i for i, p in enumerate(orb)}
    act = tuple(tuple(pos[a[p]] for p in orb) for a in x.action)
    return GSet(x.group, len(orb), act)
