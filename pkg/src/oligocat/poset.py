"""Finite posets, Möbius functions and Möbius inversion."""
from __future__ import annotations

from functools import cached_property
from itertools import product as iproduct
from typing import Any, Callable, Hashable, Optional, Sequence

import numpy as np

from .errors import DomainError, SizeLimitError
from . import kernels


class FinitePoset:
    """A poset on an indexed list of hashable elements.

    The order is stored as strict up-sets (indices strictly above each
    element). Elements must be listed in a linear extension: every strict
    up-set lies at larger indices.
    """

    def __init__(self, elements: Sequence[Hashable], leq: Optional[Callable[[Any, Any], bool]] = None,
                 *, upsets: Optional[Sequence[Sequence[int]]] = None, check: bool = False):
        self.elements = list(elements)
        self.index = {e: i for i, e in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise DomainError("duplicate poset elements")
        n = len(self.elements)
        if upsets is None:
            if leq is None:
                raise DomainError("need leq or upsets")
            els = self.elements
            upsets = [[j for j in range(n) if j != i and leq(els[i], els[j])] for i in range(n)]
        self.upsets = [sorted(u) for u in upsets]
        for i, u in enumerate(self.upsets):
            if u and u[0] <= i:
                raise DomainError("elements must be listed in a linear extension")
        if check:
            self._check_order()
        self._memo: dict[tuple[int, int], int] = {}

    def __len__(self):
        return len(self.elements)

    def _check_order(self):
        ups = [set(u) for u in self.upsets]
        for i, u in enumerate(ups):
            for j in u:
                if i in ups[j]:
                    raise DomainError("order is not antisymmetric")
                if not ups[j] <= u:
                    raise DomainError("order is not transitive")

    @cached_property
    def _upset_sets(self) -> list[frozenset]:
        return [frozenset(u) for u in self.upsets]

    def leq_idx(self, i: int, j: int) -> bool:
        return i == j or j in self._upset_sets[i]

    def leq(self, x, y) -> bool:
        return self.leq_idx(self.index[x], self.index[y])

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        indptr = np.zeros(len(self) + 1, dtype=np.int64)
        for i, u in enumerate(self.upsets):
            indptr[i + 1] = indptr[i] + len(u)
        indices = np.fromiter((j for u in self.upsets for j in u), dtype=np.int64, count=int(indptr[-1]))
        return indptr, indices

    def moebius(self, x, y) -> int:
        """mu(x, y) by the defining recursion, exact and memoized."""
        i, j = self.index[x], self.index[y]
        if not self.leq_idx(i, j):
            raise DomainError(f"{x!r} is not <= {y!r}")
        return self._mu(i, j)

    def _mu(self, i: int, j: int) -> int:
        key = (i, j)
        v = self._memo.get(key)
        if v is not None:
            return v
        if i == j:
            v = 1
        else:
            # mu(i, j) = -sum over i <= k < j of mu(i, k); walk the interval bottom-up
            interval = [k for k in [i] + self.upsets[i] if self.leq_idx(k, j)]
            vals: dict[int, int] = {}
            for k in interval:  # increasing index is a linear extension
                if k == i:
                    vals[k] = 1
                else:
                    vals[k] = -sum(vals[m] for m in interval if m < k and self.leq_idx(m, k))
                self._memo.setdefault((i, k), vals[k])
            v = vals[j]
        self._memo[key] = v
        return v

    def moebius_column(self, y) -> list[int]:
        """[mu(z, y) for every element z] (zero where z is not <= y)."""
        j = self.index[y]
        below = np.array([self.leq_idx(i, j) for i in range(len(self))], dtype=np.bool_)
        indptr, indices = self.csr
        col = kernels.moebius_column(indptr, indices, below, j)
        return [int(v) for v in col]

    def moebius_invert(self, f: Callable[[Any], Any], zero=0) -> dict:
        """g(y) = sum_{x <= y} mu(x, y) f(x) for every y."""
        fv = [f(e) for e in self.elements]
        out = {}
        for j, y in enumerate(self.elements):
            acc = zero
            for i in range(len(self)):
                if self.leq_idx(i, j):
                    m = self._mu(i, j)
                    if m:
                        acc = acc + m * fv[i]
            out[y] = acc
        return out

    def zeta(self, g: Callable[[Any], Any], zero=0) -> dict:
        """f(y) = sum_{x <= y} g(x) for every y."""
        gv = [g(e) for e in self.elements]
        out = {}
        for j, y in enumerate(self.elements):
            acc = zero
            for i in range(len(self)):
                if self.leq_idx(i, j):
                    acc = acc + gv[i]
            out[y] = acc
        return out


class ProductPoset(FinitePoset):
    """Cartesian product of posets; Möbius values multiply over factors."""

    def __init__(self, factors: Sequence[FinitePoset]):
        self.factors = list(factors)
        elems = list(iproduct(*[range(len(p)) for p in self.factors]))
        # sort by total position so up-sets land at larger indices
        elems.sort(key=lambda c: (sum(c), c))
        idx = {c: k for k, c in enumerate(elems)}
        upsets = []
        for c in elems:
            ups = [idx[d] for d in iproduct(*[[c[t]] + p.upsets[c[t]] for t, p in enumerate(self.factors)])
                   if d != c]
            upsets.append(ups)
        super().__init__(elems, upsets=upsets)

    def moebius(self, x, y) -> int:
        if not self.leq(x, y):
            raise DomainError(f"{x!r} is not <= {y!r}")
        out = 1
        for p, a, b in zip(self.factors, x, y):
            out *= p._mu(a, b)
        return out


def chain(n: int) -> FinitePoset:
    return FinitePoset(list(range(n)), upsets=[list(range(i + 1, n)) for i in range(n)])


def boolean_lattice(k: int) -> ProductPoset:
    if k > 16:
        raise SizeLimitError("boolean lattice too large to materialize")
    return ProductPoset([chain(2)] * k)


def subobject_poset(cat, x) -> FinitePoset:
    """Sub(x) as a FinitePoset over its Subobject handles, cached on the category."""
    cache = cat.__dict__.setdefault("_sub_posets", {})
    p = cache.get(x)
    if p is None:
        subs = cat.subobjects(x)
        if cat.kind == "op-finset":
            p = _partition_poset(subs)
        else:
            p = FinitePoset(subs, cat.leq)
        cache[x] = p
    return p


def _partition_poset(subs) -> FinitePoset:
    """Reverse-refinement order on partitions, up-sets built from block refinements."""
    from .regcat import set_partitions
    index = {s.key: i for i, s in enumerate(subs)}
    cache: dict[int, list] = {}

    def block_parts(block):
        ps = cache.get(len(block))
        if ps is None:
            ps = set_partitions(len(block))
            cache[len(block)] = ps
        return [[tuple(block[i] for i in b) for b in p] for p in ps]

    upsets = []
    for s in subs:
        ups = []
        for choice in iproduct(*[block_parts(b) for b in s.key]):
            blocks = [b for part in choice for b in part]
            blocks.sort(key=lambda b: b[0])
            k = index[tuple(blocks)]
            if k != index[s.key]:
                ups.append(k)
        upsets.append(ups)
    return FinitePoset(subs, upsets=upsets)
