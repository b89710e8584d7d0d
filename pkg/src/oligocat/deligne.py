"""Partition diagrams, composed by stacking.

A diagram from a bottom row of size b to a top row of size t is a
partition of the labelled points ('t', i) and ('b', i). Stacking glues the
middle rows, and each connected piece that never reaches the outer rows
contributes one factor of t.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError, InstanceMismatchError


@dataclass(frozen=True)
class PartitionDiagram:
    top: int
    bottom: int
    blocks: tuple  # canonical: sorted tuple of sorted tuples of (row, index)

    @classmethod
    def make(cls, top: int, bottom: int, blocks) -> "PartitionDiagram":
        bs = [tuple(sorted(b)) for b in blocks if b]
        pts = sorted(p for b in bs for p in b)
        want = sorted([("t", i) for i in range(top)] + [("b", i) for i in range(bottom)])
        if pts != want:
            raise DomainError("blocks do not partition the two rows")
        return cls(top, bottom, tuple(sorted(bs)))

    @classmethod
    def identity(cls, n: int) -> "PartitionDiagram":
        return cls.make(n, n, [[("t", i), ("b", i)] for i in range(n)])


def deligne_compose(b: PartitionDiagram, a: PartitionDiagram) -> tuple[int, PartitionDiagram]:
    """b o a for a: X -> Y and b: Y -> Z; returns (exponent of t, diagram)."""
    if a.top != b.bottom:
        raise InstanceMismatchError("middle rows differ")
    # layers: z = b's top, y = shared middle, x = a's bottom
    parent: dict = {}

    def find(p):
        while parent.setdefault(p, p) != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    def union(p, q):
        rp, rq = find(p), find(q)
        if rp != rq:
            parent[rq] = rp

    rename_b = {"t": "z", "b": "y"}
    rename_a = {"t": "y", "b": "x"}
    for blk in b.blocks:
        pts = [(rename_b[r], i) for r, i in blk]
        for p in pts:
            find(p)
        for p in pts[1:]:
            union(pts[0], p)
    for blk in a.blocks:
        pts = [(rename_a[r], i) for r, i in blk]
        for p in pts:
            find(p)
        for p in pts[1:]:
            union(pts[0], p)
    comps: dict = {}
    for p in list(parent):
        comps.setdefault(find(p), []).append(p)
    exponent = 0
    out = []
    for pts in comps.values():
        outer = [("t" if r == "z" else "b", i) for r, i in pts if r != "y"]
        if outer:
            out.append(outer)
        else:
            exponent += 1
    return exponent, PartitionDiagram.make(b.top, a.bottom, out)


def diagram_from_relation(cat, sub, target_size: int, source_size: int) -> PartitionDiagram:
    """A relation in Z x Y of op-finset (a partition of Z + Y) as a diagram."""
    def lab(p):
        return ("t", p) if p < target_size else ("b", p - target_size)
    return PartitionDiagram.make(target_size, source_size, [[lab(p) for p in b] for b in sub.key])


def relation_from_diagram(cat, d: PartitionDiagram, zx_obj):
    def idx(p):
        r, i = p
        return i if r == "t" else d.top + i
    return cat.sub(zx_obj, [[idx(p) for p in b] for b in d.blocks])
