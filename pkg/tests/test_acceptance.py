"""Acceptance criteria, one test per criterion with its time limit.

Each criterion test records a PASS/FAIL line (shown again in the terminal
summary). Three criteria cannot be met as stated; their tests are marked
strict xfail so that they still assert the full criterion, and a companion
test pins down the exact shortfall and the supporting evidence.
"""
import itertools
import random
import time
from fractions import Fraction

import pytest

from oligocat.atoms import Atom, CObject, atom, atom_product, build_a1, dichotomy_suite
from oligocat.errors import OligocatError
from oligocat.groups import PermGroup, disjoint_union, regular_gset, transitive_gsets, trivial_gset
from oligocat.measures import (alpha_measure, beta_measure, check_degree_axioms, check_measure_axioms,
                               derive_measure, f2_regular_measure, is_odd_category, recover_degree,
                               regular_constraint_solve, t_power_degree, trivial_degree)
from oligocat.regcat import GSetCategory, OpFinSetCategory
from oligocat.rings import RATIONAL, Poly
from oligocat.tensor import (PermMatrix, categorical_dim, compare_with_deligne,
                             find_nilpotent_nonzero_trace, orbit_keys, perm_compose, trace, verify_phi)

T = PermGroup.trivial()
Z2 = PermGroup.cyclic(2)
S3 = PermGroup.symmetric(3)

FAILS_M3 = "the m=3 beta identity needs a 3-atom fiber product, which trivial G never produces"
FAILS_PHI = "Z/2 at 4 points exceeds the enumeration budget on some triples"
FAILS_NIL = "End(A1([2])) under alpha is semisimple, so it has no non-zero nilpotent"


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def single(x):
    return CObject((Atom(x),))


# -- 1 -------------------------------------------------------------------------------

def test_criterion_1_ample_count(finset, acceptance_log):
    with Timer() as tm:
        x = trivial_gset(T, 2)
        n = len(atom_product(finset, atom(finset, x), atom(finset, x)))
    ok = acceptance_log(1, n == 7 and tm.seconds < 1, tm.seconds, f"ample subsets of [2]x[2]: {n}")
    assert ok


# -- 2 -------------------------------------------------------------------------------

def objects_by_orbits(group, max_rho):
    trans = transitive_gsets(group)
    for r in range(1, max_rho + 1):
        for combo in itertools.combinations_with_replacement(trans, r):
            yield disjoint_union(list(combo))


def test_criterion_2_alpha_formula(acceptance_log):
    bad = []
    checked = 0
    with Timer() as tm:
        for grp in (T, Z2, S3):
            mu = derive_measure(trivial_degree(GSetCategory(grp)))
            for x in objects_by_orbits(grp, 4):
                checked += 1
                if mu.object_value(x) != (-1) ** (x.rho - 1):
                    bad.append((grp.order, x.points))
    ok = acceptance_log(2, not bad and tm.seconds < 10, tm.seconds,
                        f"{checked} objects with rho <= 4 over G of order 1, 2, 6; mismatches {len(bad)}")
    assert ok, bad


# -- 3 -------------------------------------------------------------------------------

M3_IDENTITY = "3*1 + 3*(-2) + 1*4 = 1"
CUBE_IDENTITY = "2*(-2) + 4*4 + 1*(-8) = 4"  # (-2)^3 + 4(-2)^2 + 2(-2) = 4, grouped by term


@pytest.fixture(scope="module")
def beta_run(finset):
    with Timer() as tm:
        rep = check_measure_axioms(beta_measure(finset, 4), 4)
    return rep, tm.seconds


@pytest.mark.xfail(strict=True, reason=FAILS_M3)
def test_criterion_3_beta_identities(beta_run, acceptance_log):
    rep, secs = beta_run
    ids = rep.stats["identities"]
    ok = rep.passed and CUBE_IDENTITY in ids and M3_IDENTITY in ids and secs < 30
    acceptance_log(3, ok, secs, f"axioms {rep.status}; cube identity {CUBE_IDENTITY in ids}; "
                   f"m=3 identity {M3_IDENTITY in ids} ({FAILS_M3})")
    assert ok


def brute_singleton_ample_max(max_points):
    """Largest number of one-point ample subsets of a fiber product of
    surjections between sets of at most max_points points."""
    best = 0
    for ny, nxp, nx in itertools.product(range(1, max_points + 1), repeat=3):
        for f in itertools.product(range(nx), repeat=ny):
            if len(set(f)) < nx:
                continue
            for g in itertools.product(range(nx), repeat=nxp):
                if len(set(g)) < nx:
                    continue
                pts = [(a, b) for a in range(ny) for b in range(nxp) if f[a] == g[b]]
                # a one-point subset is ample when it covers both legs
                n = sum(1 for a, b in pts if {a} == set(range(ny)) and {b} == set(range(nxp)))
                best = max(best, n)
    return best


def test_criterion_3_shortfall_is_structural(beta_run, z3):
    rep, secs = beta_run
    # everything the criterion asks for except the m=3 identity holds
    assert rep.passed and secs < 30
    assert CUBE_IDENTITY in rep.stats["identities"]
    assert M3_IDENTITY not in rep.stats["identities"]
    # [DERIVED] three one-point ample subsets would be needed; brute force shows at most one
    assert brute_singleton_ample_max(4) == 1
    # the same identity does appear once a group makes a 3-atom fiber product possible
    z3rep = check_measure_axioms(beta_measure(z3, 3), 3)
    assert z3rep.passed and M3_IDENTITY in z3rep.stats["identities"]


# -- 4 -------------------------------------------------------------------------------

def test_criterion_4_oddness(finset, z2, acceptance_log):
    with Timer() as tm:
        odd1, _ = is_odd_category(finset, 5)
        odd2, wit = is_odd_category(z2, 5)
        beta_ok = beta_measure(finset, 5) is not None
        try:
            beta_measure(z2, 5)
            beta_err = False
        except OligocatError:
            beta_err = True
        f2_1 = f2_regular_measure(finset, 5)[0] is not None
        f2_2 = f2_regular_measure(z2, 4)[0] is not None
    witness_ok = wit is not None and wit["atoms"] == 2 and wit["Y"]["points"] == 2 and wit["X"]["points"] == 1
    ok = (odd1 and not odd2 and witness_ok and beta_ok and beta_err and f2_1 == odd1 and f2_2 == odd2
          and tm.seconds < 10)
    acceptance_log(4, ok, tm.seconds, f"odd(1)={odd1} odd(Z/2)={odd2} witness atoms="
                   f"{wit and wit['atoms']} f2 exists (1, Z/2)=({f2_1}, {f2_2})")
    assert ok


# -- 5 -------------------------------------------------------------------------------

def round_trip_mismatches(cat, nu, bound):
    back = recover_degree(derive_measure(nu))
    objs = cat.objects(bound)
    bad = 0
    for y in objs:
        for x in objs:
            for f in cat.surjections(y, x):
                bad += back(f) != nu(f)
    return bad


def test_criterion_5_round_trip(acceptance_log):
    opfin = OpFinSetCategory()
    bad = 0
    statuses = []
    with Timer() as tm:
        for grp in (T, Z2):
            cat = GSetCategory(grp)
            bad += round_trip_mismatches(cat, trivial_degree(cat), 6)
        bad += round_trip_mismatches(opfin, t_power_degree(opfin), 4)
        # the axiom checks run where the fiber products stay enumerable
        for cat, nu, b in [(GSetCategory(T), None, 4), (GSetCategory(Z2), None, 3),
                           (opfin, t_power_degree(opfin), 4)]:
            nu = nu or trivial_degree(cat)
            statuses.append(check_degree_axioms(nu, b).status)
            statuses.append(check_measure_axioms(derive_measure(nu), b).status)
    ok = bad == 0 and set(statuses) == {"pass"} and tm.seconds < 60
    acceptance_log(5, ok, tm.seconds, f"round-trip mismatches {bad}; axiom checks {statuses}")
    assert ok


# -- 6 -------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def phi_runs(finset, z2, opfin):
    with Timer() as tm:
        reps = {"1": verify_phi(finset, trivial_degree(finset), 3),
                "opfin": verify_phi(opfin, t_power_degree(opfin), 3),
                "Z/2": verify_phi(z2, trivial_degree(z2), 4, budget=50_000_000)}
    return reps, tm.seconds


@pytest.mark.xfail(strict=True, reason=FAILS_PHI)
def test_criterion_6_phi(phi_runs, acceptance_log):
    reps, secs = phi_runs
    ok = all(r.passed for r in reps.values()) and secs < 300
    acceptance_log(6, ok, secs, "; ".join(f"{k}: {r.status}, {r.stats['pairs']} pairs, "
                                          f"{len(r.incomplete)} incomplete" for k, r in reps.items()))
    assert ok


def test_criterion_6_shortfall_is_only_budget(phi_runs):
    reps, secs = phi_runs
    assert secs < 300
    assert reps["1"].passed and reps["opfin"].passed
    z = reps["Z/2"]
    # no counterexample anywhere; only triples too large to enumerate are left open
    assert z.witnesses == [] and z.incomplete and z.stats["pairs"] > 0


# -- 7 -------------------------------------------------------------------------------

def test_criterion_7_deligne(opfin, acceptance_log):
    with Timer() as tm:
        rep = compare_with_deligne(opfin, t_power_degree(opfin), 3)
    coeff = rep.stats.get("singleton_coefficient")
    ok = acceptance_log(7, rep.passed and coeff == "t" and tm.seconds < 60, tm.seconds,
                        f"{rep.stats['pairs']} diagram pairs, {len(rep.witnesses)} disagreements, "
                        f"singleton coefficient {coeff}")
    assert ok


# -- 8 -------------------------------------------------------------------------------

def test_criterion_8_regular_classification(finset, acceptance_log):
    with Timer() as tm:
        sol = regular_constraint_solve(finset, 4)
    s = Poly.t()
    square = s ** 2 - (2 * s + 4 * s ** 2 + s ** 3)
    # 0 is a root of every constraint but gives mu(X) = 0, which is not a unit
    roots = set(sol.admissible)
    satisfied = all(p(Fraction(-1)) == 0 and p(Fraction(-2)) == 0 for p in sol.constraints)
    ok = roots == {-1, -2} and sol.square_constraint == square and satisfied and tm.seconds < 30
    acceptance_log(8, ok, tm.seconds, f"{len(sol.constraints)} constraints, admissible roots "
                   f"{sorted(int(r) for r in roots)}, alpha and beta satisfy all: {satisfied}")
    assert ok


# -- 9 -------------------------------------------------------------------------------

def test_criterion_9_dichotomy(acceptance_log):
    with Timer() as tm:
        reps = [dichotomy_suite(GSetCategory(g), 4) for g in (T, Z2)]
    ok = all(r.passed for r in reps) and tm.seconds < 300
    acceptance_log(9, ok, tm.seconds, "; ".join(
        f"{r.stats['subgroups']} subgroups, {r.stats['quotients']} quotients, {r.status}" for r in reps))
    assert ok


# -- 10 ------------------------------------------------------------------------------

def random_matrix(cat, src, tgt, rng):
    keys = orbit_keys(cat, tgt, src)
    return PermMatrix(src, tgt, {k: Fraction(rng.randint(-3, 3)) for k in keys}, RATIONAL)


@pytest.fixture(scope="module")
def trace_run(finset):
    with Timer() as tm:
        dims_bad = 0
        for grp in (T, Z2, S3):
            cat = GSetCategory(grp)
            mu = alpha_measure(cat)
            for x in cat.objects(3):
                dims_bad += categorical_dim(cat, mu, single(x)) != mu.object_value(x)
        mu = alpha_measure(finset)
        rng = random.Random(2024)
        a1 = build_a1(finset, trivial_gset(T, 2))
        objs = [a1, single(trivial_gset(T, 2)), single(trivial_gset(T, 1))]
        cyc_bad = 0
        for _ in range(100):
            x, y = rng.choice(objs), rng.choice(objs)
            m, n = random_matrix(finset, x, y, rng), random_matrix(finset, y, x, rng)
            cyc_bad += trace(finset, mu, perm_compose(finset, mu, m, n)) != \
                trace(finset, mu, perm_compose(finset, mu, n, m))
        witness, info = find_nilpotent_nonzero_trace(finset, mu, a1)
    return dims_bad, cyc_bad, witness, info, tm.seconds


@pytest.mark.xfail(strict=True, reason=FAILS_NIL)
def test_criterion_10_traces(trace_run, acceptance_log):
    dims_bad, cyc_bad, witness, info, secs = trace_run
    ok = dims_bad == 0 and cyc_bad == 0 and witness is not None and secs < 120
    acceptance_log(10, ok, secs, f"dim mismatches {dims_bad}; trace cyclicity failures {cyc_bad}/100; "
                   f"A1([2]) witness {'found' if witness else 'none'} "
                   f"(dim {info['dimension']}, radical {info['radical_dimension']})")
    assert ok


def test_criterion_10_shortfall_is_semisimplicity(trace_run):
    dims_bad, cyc_bad, witness, info, secs = trace_run
    assert dims_bad == 0 and cyc_bad == 0 and secs < 120
    # the search is complete: a zero radical leaves no nilpotent to find
    assert witness is None and info["exhausted"] and info["radical_dimension"] == 0


def test_criterion_10_witness_one_size_up(finset, z2):
    # the next object up and a Z/2 object both carry verified witnesses
    mu = alpha_measure(finset)
    m, info = find_nilpotent_nonzero_trace(finset, mu, build_a1(finset, trivial_gset(T, 3)))
    assert m is not None
    assert trace(finset, mu, m) != 0 and info["radical_dimension"] > 0
    p = m
    for _ in range(info["radical_dimension"] + 1):
        p = perm_compose(finset, mu, p, m)
        if not p.entries:
            break
    assert not p.entries
    g = PermGroup.cyclic(2)
    mz = alpha_measure(z2)
    w, _ = find_nilpotent_nonzero_trace(z2, mz, build_a1(z2, disjoint_union([trivial_gset(g, 1), regular_gset(g)])))
    assert w is not None and trace(z2, mz, w) != 0
