"""Degree functions, derived measures and the regular measures alpha and beta."""
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oligocat import kernels
from oligocat.errors import DomainError, PreconditionError
from oligocat.groups import PermGroup, regular_gset, trivial_gset
from oligocat.measures import (ConstantMeasure, alpha_measure, beta_measure, check_degree_axioms,
                               check_measure_axioms, constant_degree, derive_measure,
                               f2_regular_measure, is_odd_category, power_measure, recover_degree,
                               regular_constraint_solve, t_power_degree, trivial_degree)
from oligocat.regcat import FinSet, GSetCategory, set_partitions
from oligocat.rings import GF2, GF2_RING, Poly


def brute_derived_trivial(f):
    """sum over orbit unions Z of Y covering X of (-1)^(rho(Y) - rho(Z))."""
    y = f.source
    total = 0
    for sel in itertools.product([0, 1], repeat=y.rho):
        hit = {f.table[orb[0]] for orb, s in zip(y.orbits, sel) if s}
        covered = set()
        for p in hit:
            covered |= set(f.target.orbits[f.target.orbit_index[p]])
        if len(covered) == f.target.points:
            total += (-1) ** (y.rho - sum(sel))
    return total


def brute_derived_t_power(n, table):
    """Sum over partitions pi of an n-set separating the image of ``table``."""
    acc = {}
    for part in set_partitions(n):
        where = {p: i for i, b in enumerate(part) for p in b}
        if len({where[v] for v in table}) != len(table):
            continue
        coef = 1
        for b in part:
            coef *= (-1) ** (len(b) - 1) * math.factorial(len(b) - 1)
        k = len(part) - len(table)
        acc[k] = acc.get(k, 0) + coef
    return Poly([acc.get(i, 0) for i in range(max(acc) + 1)])


def brute_cover(tmask, full, m):
    total = 0
    for r in range(1, len(tmask) + 1):
        for e in itertools.combinations(range(len(tmask)), r):
            acc = 0
            for i in e:
                acc |= tmask[i]
            if acc == full:
                total += m ** (len(tmask) - r)
    return total


# -- degree functions ---------------------------------------------------------

def test_trivial_degree_axioms(z2):
    rep = check_degree_axioms(trivial_degree(z2), 3)
    assert rep.passed and rep.stats["base_changes"] > 0


def test_t_power_degree_axioms(opfin):
    assert check_degree_axioms(t_power_degree(opfin), 3).passed


def test_constant_degree_fails_multiplicativity(finset):
    rep = check_degree_axioms(constant_degree(finset, 3), 3)
    assert rep.status == "fail"
    # base change along a section of a non-injective map can also give an iso
    assert "b" in {w["axiom"] for w in rep.witnesses}


def test_t_power_rejected_outside_opfinset(finset):
    with pytest.raises(DomainError):
        t_power_degree(finset)


# -- derived measures -----------------------------------------------------------

@pytest.mark.parametrize("grp", [PermGroup.trivial(), PermGroup.cyclic(2), PermGroup.symmetric(3)])
def test_derived_matches_brute_sum(grp):
    cat = GSetCategory(grp)
    mu = derive_measure(trivial_degree(cat))
    objs = cat.objects(4)
    for y in objs:
        for x in objs:
            for f in cat.surjections(y, x):
                assert mu.value(f) == brute_derived_trivial(f)


def test_derived_general_path_matches_fast_path(z2):
    # the Möbius-column route on Sub(Y), forced by hiding the trivial flag
    nu = trivial_degree(z2)
    slow_nu = type(nu)(z2, nu.ring, nu.rule, "trivial-slow")
    fast, slow = derive_measure(nu), derive_measure(slow_nu)
    objs = z2.objects(4)
    for y in objs:
        for x in objs:
            for f in z2.surjections(y, x):
                assert fast.value(f) == slow.value(f)


@pytest.mark.parametrize("grp", [PermGroup.trivial(), PermGroup.cyclic(2), PermGroup.symmetric(3)])
def test_derived_object_values_are_alpha(grp):
    # [PAPER] mu(B(X)) = (-1)^(rho(X)-1) for the trivial degree function
    cat = GSetCategory(grp)
    mu = derive_measure(trivial_degree(cat))
    for x in cat.objects(4):
        assert mu.object_value(x) == (-1) ** (x.rho - 1)


@pytest.mark.parametrize("n,m", [(1, 0), (2, 0), (2, 1), (3, 1), (3, 2), (4, 2), (4, 3)])
def test_derived_t_power_matches_partition_sum(opfin, n, m):
    mu = derive_measure(t_power_degree(opfin))
    y, x = FinSet.of_size(n), FinSet.of_size(m)
    for f in opfin.surjections(y, x):
        assert mu.value(f) == brute_derived_t_power(n, f.table)


def test_derived_object_value_on_opfinset(opfin):
    # [DERIVED] mu(B([n])) = t(t-1)...(t-n+1): the falling factorial
    mu = derive_measure(t_power_degree(opfin))
    for n in range(5):
        want = Poly([1])
        for i in range(n):
            want = want * Poly([-i, 1])
        assert mu.object_value(FinSet.of_size(n)) == want


@given(st.lists(st.integers(1, 4), min_size=1, max_size=4), st.integers(-3, 3))
def test_cover_sum_variants_agree(counts, m):
    tm = [1 << t for t, c in enumerate(counts) for _ in range(c)]
    full = (1 << len(counts)) - 1
    want = brute_cover(tm, full, m)
    arr = np.array(tm, dtype=np.int64)
    assert kernels.cover_sum_numpy(arr, full, m) == want
    assert kernels.cover_sum_numba(arr, full, m) == want
    assert kernels.cover_sum_by_targets(counts, m) == want


def test_signature_value_beyond_brute_limit(finset):
    mu = derive_measure(trivial_degree(finset))
    # [DERIVED] prod_t ((1+m)^c - m^c) with m = -1 is (-1)^(k - r)
    assert mu.value_for_signature([9, 10]) == (-1) ** (19 - 2)
    with pytest.raises(DomainError):
        mu.value_for_signature([0, 2])


# -- round trips ----------------------------------------------------------------

def test_round_trip_trivial(z2):
    nu = trivial_degree(z2)
    back = recover_degree(derive_measure(nu))
    for y in z2.objects(4):
        for x in z2.objects(4):
            for f in z2.surjections(y, x):
                assert back(f) == nu(f)


def test_round_trip_t_power(opfin):
    nu = t_power_degree(opfin)
    back = recover_degree(derive_measure(nu))
    for n in range(5):
        for m in range(n + 1):
            for f in opfin.surjections(FinSet.of_size(n), FinSet.of_size(m)):
                assert back(f) == nu(f)


@pytest.mark.parametrize("grp", [PermGroup.trivial(), PermGroup.cyclic(2)])
def test_recover_degree_fast_path_matches_subobject_sum(grp):
    cat = GSetCategory(grp)
    for mu in (alpha_measure(cat), power_measure(cat, 3)):
        fast = recover_degree(mu)
        plain = type(mu)(cat, mu.ring, mu.object_rule, mu.name)  # no rho rule
        slow = recover_degree(plain)
        for y in cat.objects(3):
            for x in cat.objects(3):
                for f in cat.surjections(y, x):
                    assert fast(f) == slow(f)


# -- alpha, beta, oddness -------------------------------------------------------

def test_alpha_passes_axioms(z2):
    rep = check_measure_axioms(alpha_measure(z2), 3)
    assert rep.passed and rep.stats["squares"] > 0


def test_beta_identities_on_trivial_group(finset):
    # [PAPER] (-2)^3 + 4(-2)^2 + 2(-2) = 4 from the seven ample subsets of [2]x[2]
    rep = check_measure_axioms(beta_measure(finset, 4), 4)
    assert rep.passed
    assert "2*(-2) + 4*4 + 1*(-8) = 4" in rep.stats["identities"]


def test_beta_odd_identity_needs_three_atoms(z3):
    # [PAPER] 3*1 + 3*(-2) + 1*4 = 1: the fiber product G x_1 G has three orbits for Z/3
    rep = check_measure_axioms(beta_measure(z3, 3), 3)
    assert rep.passed
    assert "3*1 + 3*(-2) + 1*4 = 1" in rep.stats["identities"]


def test_trivial_group_fiber_products_of_atoms_are_atoms(finset):
    # why the three-atom identity cannot appear without a group action
    from oligocat.measures import squares
    assert all(sq.fp.obj.rho == 1 for sq in squares(finset, 4, level="E"))


def test_oddness_dichotomy(finset, z2):
    assert is_odd_category(finset, 5) == (True, None)
    odd, wit = is_odd_category(z2, 2)
    assert not odd and wit["atoms"] == 2
    with pytest.raises(PreconditionError):
        beta_measure(z2, 2)
    assert f2_regular_measure(finset, 3)[0] is not None
    assert f2_regular_measure(z2, 2)[0] is None


def test_gf2_constant_measure_fails_on_even_fiber(z2):
    rep = check_measure_axioms(ConstantMeasure(z2, GF2_RING, GF2(1)), 2)
    assert rep.status == "fail"


def test_power_measure_other_than_alpha_beta_fails(finset):
    assert check_measure_axioms(power_measure(finset, 3), 3).status == "fail"


def test_regular_constraint_solve(finset):
    sol = regular_constraint_solve(finset, 4)
    s = Poly.t()
    # [PAPER] the [2]-square gives s^2 = 2s + 4s^2 + s^3
    assert sol.square_constraint == s * s - (2 * s + 4 * s * s + s * s * s)
    assert sorted(sol.admissible) == [Fraction(-2), Fraction(-1)]
    for p in sol.constraints:
        assert p(Fraction(-1)) == 0 and p(Fraction(-2)) == 0


def test_regular_measures_rejected_off_gsets(opfin):
    with pytest.raises(DomainError):
        alpha_measure(opfin)


@pytest.mark.parametrize("grp", [PermGroup.cyclic(2), PermGroup.symmetric(3)])
def test_alpha_object_values_on_regular_and_trivial(grp):
    cat = GSetCategory(grp)
    a = alpha_measure(cat)
    assert a.object_value(regular_gset(grp)) == 1
    assert a.object_value(trivial_gset(grp, 3)) == 1
