"""Exact coefficient rings: rationals, Q[t] and GF(2).

Elements are plain Python objects with operator overloading so the rest of
the package can write ``a * b + c`` regardless of the ring. A ``Ring``
instance supplies zero/one, integer coercion, unit tests and the canonical
string form used in JSON reports.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Sequence


class RingError(ValueError):
    pass


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"cannot coerce {x!r} to a rational")


class Poly:
    """Univariate polynomial in ``t`` with rational coefficients.

    Coefficients are stored lowest degree first with trailing zeros removed,
    so structural equality is polynomial equality.
    """
    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [_frac(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def t(cls, power: int = 1) -> "Poly":
        return cls([0] * power + [1])

    @classmethod
    def const(cls, c) -> "Poly":
        return cls([c])

    @staticmethod
    def _lift(x) -> "Poly":
        if isinstance(x, Poly):
            return x
        if isinstance(x, (int, Fraction)):
            return Poly([x])
        return NotImplemented

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        o = Poly._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self):
        if len(self.coeffs) <= 1:
            return hash(self.coeffs[0] if self.coeffs else 0)
        return hash(self.coeffs)

    def __add__(self, other):
        o = Poly._lift(other)
        if o is NotImplemented:
            return o
        a, b = self.coeffs, o.coeffs
        n = max(len(a), len(b))
        return Poly([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other):
        o = Poly._lift(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = Poly._lift(other)
        if o is NotImplemented:
            return o
        a, b = self.coeffs, o.coeffs
        if not a or not b:
            return Poly()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise RingError("negative power of a polynomial")
        out, base = Poly([1]), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __truediv__(self, other):
        # only exact division by a nonzero constant or an exact divisor
        o = Poly._lift(other)
        if o is NotImplemented:
            return o
        q, r = divmod(self, o)
        if r:
            raise RingError(f"{self} is not divisible by {o}")
        return q

    def __divmod__(self, other):
        o = Poly._lift(other)
        if not o.coeffs:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [Fraction(0)] * max(len(rem) - len(o.coeffs) + 1, 0)
        lead = o.coeffs[-1]
        while len(rem) >= len(o.coeffs) and rem:
            shift = len(rem) - len(o.coeffs)
            c = rem[-1] / lead
            q[shift] = c
            for i, oc in enumerate(o.coeffs):
                rem[shift + i] -= c * oc
            while rem and rem[-1] == 0:
                rem.pop()
        return Poly(q), Poly(rem)

    def __call__(self, x):
        acc = Fraction(0) if not isinstance(x, Poly) else Poly()
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def monic(self) -> "Poly":
        if not self.coeffs:
            return self
        return Poly([c / self.coeffs[-1] for c in self.coeffs])

    def constant_value(self):
        """Return the rational value if the polynomial is constant, else None."""
        if len(self.coeffs) <= 1:
            return self.coeffs[0] if self.coeffs else Fraction(0)
        return None

    def __repr__(self):
        return f"Poly({format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    while b:
        a, b = b, divmod(a, b)[1]
    return a.monic()


def rational_roots(p: Poly) -> list[Fraction]:
    """Distinct rational roots of a nonzero polynomial, sorted ascending."""
    if not p:
        raise RingError("the zero polynomial has every root")
    roots = []
    # strip factors of t first so the constant term is nonzero
    while p.coeffs and p.coeffs[0] == 0:
        if Fraction(0) not in roots:
            roots.append(Fraction(0))
        p = Poly(p.coeffs[1:])
    if p.degree >= 1:
        from math import lcm
        den = lcm(*[c.denominator for c in p.coeffs])
        ints = [int(c * den) for c in p.coeffs]
        lead, const = abs(ints[-1]), abs(ints[0])
        cands = set()
        for num in _divisors(const):
            for d in _divisors(lead):
                cands.add(Fraction(num, d))
                cands.add(Fraction(-num, d))
        roots.extend(r for r in cands if p(r) == 0)
    return sorted(set(roots))


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def format_poly(p: Poly, var: str = "t") -> str:
    """Canonical ascending form, e.g. ``2 - 3*t + t^2``."""
    if not p.coeffs:
        return "0"
    parts = []
    for k, c in enumerate(p.coeffs):
        if c == 0:
            continue
        mag = abs(c)
        if k == 0:
            body = _fmt_frac(mag)
        else:
            mono = var if k == 1 else f"{var}^{k}"
            body = mono if mag == 1 else f"{_fmt_frac(mag)}*{mono}"
        sign = "-" if c < 0 else "+"
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(f" {sign} {body}")
    return "".join(parts)


def _fmt_frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


_TERM = re.compile(r"^(?:(\d+(?:/\d+)?)\*?)?(t(?:\^(\d+))?)?$")


def parse_poly(s: str) -> Poly:
    s = s.replace(" ", "")
    if not s:
        raise RingError("empty polynomial")
    if s[0] not in "+-":
        s = "+" + s
    coeffs: dict[int, Fraction] = {}
    for sign, body in re.findall(r"([+-])([^+-]+)", s):
        m = _TERM.match(body)
        if not m or not (m.group(1) or m.group(2)):
            raise RingError(f"bad polynomial term {body!r}")
        c = Fraction(m.group(1)) if m.group(1) else Fraction(1)
        k = 0 if not m.group(2) else int(m.group(3) or 1)
        coeffs[k] = coeffs.get(k, Fraction(0)) + (c if sign == "+" else -c)
    n = max(coeffs) + 1
    return Poly([coeffs.get(i, 0) for i in range(n)])


class GF2:
    __slots__ = ("v",)

    def __init__(self, v: int = 0):
        self.v = int(v) & 1

    @staticmethod
    def _lift(x):
        if isinstance(x, GF2):
            return x
        if isinstance(x, int):
            return GF2(x)
        if isinstance(x, Fraction) and x.denominator % 2:
            return GF2(x.numerator)
        return NotImplemented

    def __add__(self, o):
        o = GF2._lift(o)
        return o if o is NotImplemented else GF2(self.v ^ o.v)

    __radd__ = __add__
    __sub__ = __add__
    __rsub__ = __add__

    def __neg__(self):
        return self

    def __mul__(self, o):
        o = GF2._lift(o)
        return o if o is NotImplemented else GF2(self.v & o.v)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = GF2._lift(o)
        if not o.v:
            raise ZeroDivisionError("division by zero in GF(2)")
        return self

    def __pow__(self, n):
        return GF2(1) if n == 0 else self

    def __eq__(self, o):
        o = GF2._lift(o)
        return NotImplemented if o is NotImplemented else self.v == o.v

    def __hash__(self):
        return hash(("gf2", self.v))

    def __bool__(self):
        return bool(self.v)

    def __repr__(self):
        return f"GF2({self.v})"

    def __str__(self):
        return str(self.v)


class Ring:
    name = "abstract"

    def zero(self):
        return self.coerce(0)

    def one(self):
        return self.coerce(1)

    def coerce(self, x):
        raise NotImplementedError

    def is_unit(self, x) -> bool:
        raise NotImplementedError

    def fmt(self, x) -> str:
        raise NotImplementedError

    def parse(self, s: str):
        raise NotImplementedError

    def __repr__(self):
        return f"<ring {self.name}>"

    def __eq__(self, other):
        return isinstance(other, Ring) and other.name == self.name

    def __hash__(self):
        return hash(self.name)


class RationalRing(Ring):
    name = "rational"

    def coerce(self, x):
        if isinstance(x, Poly):
            v = x.constant_value()
            if v is None:
                raise RingError(f"{x} is not a rational number")
            return v
        if isinstance(x, GF2):
            raise RingError("GF(2) element in rational context")
        return _frac(x)

    def is_unit(self, x) -> bool:
        return self.coerce(x) != 0

    def fmt(self, x) -> str:
        return _fmt_frac(self.coerce(x))

    def parse(self, s: str):
        return Fraction(s.strip())


class PolyRing(Ring):
    name = "poly-t"

    def coerce(self, x):
        if isinstance(x, GF2):
            raise RingError("GF(2) element in Q[t] context")
        return x if isinstance(x, Poly) else Poly([_frac(x)])

    def is_unit(self, x) -> bool:
        p = self.coerce(x)
        return p.degree == 0

    def fmt(self, x) -> str:
        return format_poly(self.coerce(x))

    def parse(self, s: str):
        return parse_poly(s)


class GF2Ring(Ring):
    name = "gf2"

    def coerce(self, x):
        y = GF2._lift(x)
        if y is NotImplemented:
            raise RingError(f"cannot coerce {x!r} to GF(2)")
        return y

    def is_unit(self, x) -> bool:
        return bool(self.coerce(x))

    def fmt(self, x) -> str:
        return str(self.coerce(x))

    def parse(self, s: str):
        return GF2(int(s))


RATIONAL = RationalRing()
POLY_T = PolyRing()
GF2_RING = GF2Ring()

RINGS = {r.name: r for r in (RATIONAL, POLY_T, GF2_RING)}


def ring_by_name(name: str) -> Ring:
    try:
        return RINGS[name]
    except KeyError:
        raise RingError(f"unknown ring {name!r}; expected one of {sorted(RINGS)}") from None


def ring_sum(ring: Ring, values: Sequence):
    acc = ring.zero()
    for v in values:
        acc = acc + v
    return acc
