"""Command-line entry point: ``oligocat <command> <scenario.json> [flags]``.

Exit codes: 0 when every check passes, 1 when a check fails or cannot be
completed within its bound (witnesses in the report), 2 on bad input or an
enumeration bound error.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from typing import Any

from . import __version__
from .errors import OligocatError
from .groups import GSet, PermGroup, disjoint_union, regular_gset, trivial_gset
from .regcat import FinSet, GSetCategory, OpFinSetCategory, RegularCategory, Subobject
from .rings import RingError, ring_by_name

COMMANDS = ["subobjects", "mobius", "check-degree", "derive-measure", "check-measure", "oddness",
            "regular-solve", "atom-product", "dichotomy", "knop-compose", "perm-compose", "phi-verify",
            "deligne-compare", "nilpotent-search", "report-all"]


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# scenarios

class Scenario:
    def __init__(self, data: dict, args):
        if not isinstance(data, dict):
            raise InputError("scenario must be a JSON object")
        self.data = data
        self.name = data.get("name", "scenario")
        cspec = data.get("category")
        if not isinstance(cspec, dict) or "kind" not in cspec:
            raise InputError("scenario needs category.kind")
        bounds = data.get("bounds", {})
        self.max_points = args.max_points or bounds.get("max_points", 3)
        self.max_elements = args.max_elements or bounds.get("max_elements", 3)
        if self.max_points <= 0 or self.max_elements < 0:
            raise InputError("bounds must be positive")
        kind = cspec["kind"]
        if kind in ("gsets", "rc-a"):
            self.group = parse_group(cspec.get("group", {"name": "trivial"}))
            self.cat: RegularCategory = GSetCategory(self.group, max(12, self.max_points ** 2))
            self.bound = self.max_points
        elif kind in ("op-finset", "rc-b"):
            self.group = None
            self.cat = OpFinSetCategory()
            self.bound = self.max_elements
        else:
            raise InputError(f"unknown category kind {kind!r}")
        self.ring = ring_by_name(args.ring or data.get("ring", "poly-t" if self.group is None else "rational"))
        self.params = data.get("params", {})
        self.seed = args.seed if args.seed is not None else data.get("seed", 0)

    @property
    def is_gsets(self) -> bool:
        return isinstance(self.cat, GSetCategory)

    def obj(self, spec) -> Any:
        return parse_object(self.cat, spec)


def parse_group(spec) -> PermGroup:
    if isinstance(spec, str):
        spec = {"name": spec}
    name = spec.get("name")
    if name == "trivial":
        return PermGroup.trivial(1)
    if name == "cyclic":
        return PermGroup.cyclic(int(spec["n"]))
    if name == "symmetric":
        return PermGroup.symmetric(int(spec["n"]))
    if "degree" in spec and "generators" in spec:
        return PermGroup.from_cycle_lists(int(spec["degree"]), spec["generators"])
    raise InputError(f"cannot parse group {spec!r}")


def parse_object(cat: RegularCategory, spec):
    """Objects: "[n]", "G" (regular G-set), sums "[1]+G", or raw JSON."""
    if isinstance(spec, dict):
        if isinstance(cat, GSetCategory):
            acts = spec.get("action") or [list(range(spec["points"]))] * len(cat.group.generators)
            return GSet(cat.group, int(spec["points"]), tuple(tuple(a) for a in acts))
        return FinSet(tuple(spec["labels"]))
    if not isinstance(spec, str):
        raise InputError(f"cannot parse object {spec!r}")
    parts = [p.strip() for p in spec.split("+")]
    if isinstance(cat, OpFinSetCategory):
        n = 0
        for p in parts:
            n += _bracket(p)
        return FinSet.of_size(n)
    pieces = []
    for p in parts:
        if p == "G":
            pieces.append(regular_gset(cat.group))
        else:
            pieces.append(trivial_gset(cat.group, _bracket(p)))
    return pieces[0] if len(pieces) == 1 else disjoint_union(pieces)


def _bracket(p: str) -> int:
    if not (p.startswith("[") and p.endswith("]")):
        raise InputError(f"cannot parse object term {p!r}")
    try:
        return int(p[1:-1])
    except ValueError:
        raise InputError(f"cannot parse object term {p!r}") from None


def parse_relation(cat: RegularCategory, target, source, spec) -> Subobject:
    """RC-A: list of [y, x] point pairs; RC-B: list of blocks of labels "t0"/"b1"."""
    prod = cat.product(target, source).obj
    if isinstance(cat, GSetCategory):
        m = 0
        for y, x in spec:
            m |= 1 << (y * source.points + x)
        return cat.sub(prod, [p for p in range(prod.points) if (m >> p) & 1])
    blocks = []
    for b in spec:
        blk = []
        for lab in b:
            row, i = lab[0], int(lab[1:])
            blk.append(i if row == "t" else target.size + i)
        blocks.append(blk)
    return cat.sub(prod, blocks)


# ---------------------------------------------------------------------------
# commands

def _report_out(rep) -> dict:
    out = rep.to_json()
    out["failures"] = len(rep.witnesses) + len(rep.incomplete)
    return out


def _measure(sc: Scenario, name: str):
    from . import measures as M
    if name == "derived":
        return M.derive_measure(_degree(sc, sc.params.get("degree")))
    if name == "alpha":
        return M.alpha_measure(sc.cat)
    if name == "beta":
        return M.beta_measure(sc.cat, sc.bound + 1)
    if name == "gf2":
        return M.ConstantMeasure(sc.cat, ring_by_name("gf2"), 1, level="E")
    raise InputError(f"unknown measure {name!r}")


def _degree(sc: Scenario, name=None):
    from . import measures as M
    name = name or ("t-power" if not sc.is_gsets else "trivial")
    if name == "trivial":
        return M.trivial_degree(sc.cat, sc.ring if sc.ring.name != "gf2" else ring_by_name("rational"))
    if name == "t-power":
        return M.t_power_degree(sc.cat)
    raise InputError(f"unknown degree function {name!r}")


def cmd_subobjects(sc: Scenario, args) -> dict:
    x = sc.obj(args.object[0] if args.object else sc.params.get("object", "[2]"))
    subs = sc.cat.subobjects(x)
    from .tensor import _is_principal_sub
    return {"object": sc.cat.object_json(x), "count": len(subs),
            "subobjects": [dict(sc.cat.sub_json(s), principal=_is_principal_sub(sc.cat, s)) for s in subs],
            "failures": 0}


def cmd_mobius(sc: Scenario, args) -> dict:
    from .poset import subobject_poset
    x = sc.obj(args.object[0] if args.object else sc.params.get("object", "[2]"))
    p = subobject_poset(sc.cat, x)
    col = p.moebius_column(sc.cat.top(x))
    bottom = sc.cat.bottom(x)
    return {"object": sc.cat.object_json(x), "top": sc.cat.sub_json(sc.cat.top(x)),
            "mu_to_top": [{"sub": sc.cat.sub_json(s), "mu": m} for s, m in zip(p.elements, col)],
            "mu_bottom_top": col[p.index[bottom]], "failures": 0}


def cmd_check_degree(sc: Scenario, args) -> dict:
    from .measures import check_degree_axioms
    return _report_out(check_degree_axioms(_degree(sc, args.degree), sc.bound))


def cmd_derive_measure(sc: Scenario, args) -> dict:
    from .measures import derive_measure
    nu = _degree(sc, args.degree)
    mu = derive_measure(nu)
    rows = []
    for x in sc.cat.objects(sc.bound):
        rows.append({"object": sc.cat.object_json(x), "mu": mu.ring.fmt(mu.object_value(x))})
    return {"degree": nu.name, "ring": mu.ring.name, "bound": sc.bound, "object_values": rows, "failures": 0}


def cmd_check_measure(sc: Scenario, args) -> dict:
    from .measures import check_measure_axioms
    mu = _measure(sc, args.measure or sc.params.get("measure", "derived"))
    return _report_out(check_measure_axioms(mu, sc.bound))


def cmd_oddness(sc: Scenario, args) -> dict:
    from .measures import f2_regular_measure, is_odd_category
    odd, witness = is_odd_category(sc.cat, sc.bound)
    f2, _ = f2_regular_measure(sc.cat, min(sc.bound, 3))
    out = {"odd": odd, "bound": sc.bound, "f2_regular_measure": f2 is not None,
           "failures": 0 if odd else 1}
    if witness:
        out["witness"] = witness
    return out


def cmd_regular_solve(sc: Scenario, args) -> dict:
    from .measures import regular_constraint_solve
    from .rings import format_poly
    sol = regular_constraint_solve(sc.cat, sc.bound)
    return {"bound": sc.bound, "constraints": [format_poly(p, "s") for p in sol.constraints],
            "gcd": format_poly(sol.gcd, "s"), "roots": [str(r) for r in sol.roots],
            "admissible": [str(r) for r in sol.admissible],
            "square_constraint": format_poly(sol.square_constraint, "s") if sol.square_constraint else None,
            "failures": 0}


def cmd_atom_product(sc: Scenario, args) -> dict:
    from .atoms import Atom, atom_product, multiplicity_one
    specs = args.object or sc.params.get("objects", ["[2]", "[2]"])
    if len(specs) != 2:
        raise InputError("atom-product needs two objects")
    x, y = sc.obj(specs[0]), sc.obj(specs[1])
    c = atom_product(sc.cat, Atom(x), Atom(y))
    return {"count": len(c), "atoms": [{"ample": sc.cat.sub_json(s), "label": sc.cat.object_json(a.label)}
                                       for a, s in zip(c.atoms, c.origins)],
            "multiplicity_one": multiplicity_one(sc.cat, x, y), "failures": 0}


def cmd_dichotomy(sc: Scenario, args) -> dict:
    from . import atoms as A
    from .groups import aut_gset
    if not sc.is_gsets:
        raise InputError("the dichotomy is defined for G-sets")
    x = sc.obj(args.object[0] if args.object else sc.params.get("object", "[2]"))
    spec = sc.params.get("relation_set", "ample")
    cat = sc.cat
    if spec == "ample":
        xx = cat.product(x, x).obj
        rs = A.RelationSet(x, frozenset(Subobject(xx, int(v)) for v in A.ample_relations(cat, x)))
    elif spec == "diagonal":
        rs = A.RelationSet(x, frozenset([cat.diagonal(x)]))
    elif spec == "aut":
        rs = A.graph_relation_set(cat, x, aut_gset(x).elements())
    elif isinstance(spec, dict) and "quotient" in spec:
        rs = A.quotient_relation_set(cat, cat.quotient(x, spec["quotient"]))
    elif isinstance(spec, list):
        rs = A.relation_set(cat, x, [parse_relation(cat, x, x, r) for r in spec])
    else:
        raise InputError(f"unknown relation set {spec!r}")
    chk = A.relation_set_check(cat, rs)
    out: dict = {"members": len(rs), "check": {"ok": chk.ok, "tag": chk.tag, "witness": chk.witness,
                                               "closure_ok": chk.closure_ok, "strategy": chk.strategy}}
    if not chk.ok:
        out["failures"] = 1
        return out
    res = A.equivalence_dichotomy(cat, rs, chk)
    if isinstance(res, A.ProperQuotient):
        out["result"] = {"quotient": {"table": list(res.map.table), "target": cat.object_json(res.map.target)},
                         "kernel_pair": cat.sub_json(res.kernel)}
    else:
        out["result"] = {"subgroup": sorted(list(g) for g in res.elements)}
    out["failures"] = 0
    return out


def _knop_inputs(sc: Scenario):
    p = sc.params
    try:
        z, y, x = sc.obj(p["Z"]), sc.obj(p["Y"]), sc.obj(p["X"])
        b = parse_relation(sc.cat, z, y, p["B"])
        a = parse_relation(sc.cat, y, x, p["A"])
    except KeyError as e:
        raise InputError(f"knop inputs need Z, Y, X, B, A (missing {e})") from None
    return z, y, x, b, a


def cmd_knop_compose(sc: Scenario, args) -> dict:
    from .tensor import KnopMor, knop_compose
    z, y, x, b, a = _knop_inputs(sc)
    nu = _degree(sc, args.degree)
    r = nu.ring
    c = knop_compose(sc.cat, nu, KnopMor(y, z, {b: r.one()}, r), KnopMor(x, y, {a: r.one()}, r))
    return {"terms": _terms_json(sc.cat, c.terms, r), "failures": 0}


def _terms_json(cat, terms: dict, ring) -> list:
    rows = [{"relation": cat.sub_json(k), "coeff": ring.fmt(v)} for k, v in terms.items()]
    return sorted(rows, key=lambda d: json.dumps(d, sort_keys=True))


def cmd_perm_compose(sc: Scenario, args) -> dict:
    from .measures import derive_measure
    from .tensor import KnopMor, perm_compose, phi_morphisms, a1_index
    z, y, x, b, a = _knop_inputs(sc)
    nu = _degree(sc, args.degree)
    mu = derive_measure(nu)
    r = nu.ring
    pb = phi_morphisms(sc.cat, KnopMor(y, z, {b: r.one()}, r))
    pa = phi_morphisms(sc.cat, KnopMor(x, y, {a: r.one()}, r))
    m = perm_compose(sc.cat, mu, pb, pa)
    _, back = a1_index(sc.cat, z, x)
    return {"entries": _terms_json(sc.cat, {back[k]: v for k, v in m.entries.items()}, r), "failures": 0}


def cmd_phi_verify(sc: Scenario, args) -> dict:
    from .tensor import verify_phi
    rep = verify_phi(sc.cat, _degree(sc, args.degree), sc.bound)
    return _report_out(rep)


def cmd_deligne_compare(sc: Scenario, args) -> dict:
    from .measures import t_power_degree
    from .tensor import compare_with_deligne
    if sc.is_gsets:
        raise InputError("deligne-compare runs on op-finset scenarios")
    return _report_out(compare_with_deligne(sc.cat, t_power_degree(sc.cat), sc.bound))


def cmd_nilpotent_search(sc: Scenario, args) -> dict:
    from .atoms import build_a1
    from .tensor import find_nilpotent_nonzero_trace
    x = sc.obj(args.object[0] if args.object else sc.params.get("object", "[2]"))
    mu = _measure(sc, args.measure or sc.params.get("measure", "alpha"))
    m, info = find_nilpotent_nonzero_trace(sc.cat, mu, build_a1(sc.cat, x))
    out: dict = {"info": info, "found": m is not None, "failures": 0 if m is not None else 1}
    if m is not None:
        _, back = _end_index(sc.cat, x)
        out["witness"] = _terms_json(sc.cat, {back[k]: v for k, v in m.entries.items()}, mu.ring)
    return out


def _end_index(cat, x):
    from .tensor import a1_index
    return a1_index(cat, x, x)


def cmd_report_all(sc: Scenario, args) -> dict:
    """Run the checks that apply to this scenario and aggregate."""
    sections = {}
    checks = [("check-degree", cmd_check_degree), ("check-measure", cmd_check_measure),
              ("phi-verify", cmd_phi_verify)]
    if sc.is_gsets:
        checks += [("oddness", cmd_oddness), ("regular-solve", cmd_regular_solve),
                   ("dichotomy", cmd_dichotomy)]
    else:
        checks += [("deligne-compare", cmd_deligne_compare)]
    for name, fn in checks:
        try:
            sections[name] = fn(sc, args)
        except OligocatError as e:
            sections[name] = {"error": str(e), "failures": 1}
    return {"sections": sections, "failures": sum(s.get("failures", 0) for s in sections.values())}


HANDLERS = {name: globals()["cmd_" + name.replace("-", "_")] for name in COMMANDS}


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="oligocat", description="Measures on regular categories: exact checks.")
    ap.add_argument("--version", action="version", version=f"oligocat {__version__}")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("scenario", help="scenario JSON file")
    ap.add_argument("--max-points", type=int, default=None)
    ap.add_argument("--max-elements", type=int, default=None)
    ap.add_argument("--ring", choices=["rational", "poly-t", "gf2"], default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--object", action="append", default=None, help='e.g. "[3]", "G", "[1]+G"')
    ap.add_argument("--measure", choices=["derived", "alpha", "beta", "gf2"], default=None)
    ap.add_argument("--degree", choices=["trivial", "t-power"], default=None)
    fmt = ap.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json", default="json")
    fmt.add_argument("--text", dest="fmt", action="store_const", const="text")
    return ap


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (set, frozenset, tuple)):
        return list(v)
    if hasattr(v, "item"):
        return v.item()
    return str(v)


def _text(d, indent=0) -> str:
    pad = "  " * indent
    lines = []
    for k in sorted(d):
        v = d[k]
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(_text(v, indent + 1))
        else:
            lines.append(f"{pad}{k}: {json.dumps(v, sort_keys=True, default=_jsonable)}")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.scenario) as fh:
            data = json.load(fh)
        sc = Scenario(data, args)
        random.seed(sc.seed)
        out = HANDLERS[args.command](sc, args)
    except (OSError, json.JSONDecodeError, InputError, RingError, OligocatError, KeyError, TypeError) as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e)}, sort_keys=True), file=sys.stderr)
        return 2
    out = {"command": args.command, "scenario": sc.name, "version": __version__, **out}
    if args.fmt == "text":
        print(_text(out))
    else:
        print(json.dumps(out, sort_keys=True, indent=2, default=_jsonable))
    return 0 if out.get("failures", 0) == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
