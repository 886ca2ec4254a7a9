import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wreathgen import certify as C
from wreathgen import fixtures as F
from wreathgen import genprob, lattice
from wreathgen.bounds import Bound, log2_upper_int
from wreathgen.errors import InputError, MissingConstantError
from wreathgen.permcore import PermGroup
from wreathgen.tower import TowerSpec, abelianization_witness, fixed_point_witness

A5 = F.alternating(5)
A5_SPEC = TowerSpec(A5)
PSL_SPEC = TowerSpec(F.psl25_on_projective_line())
YES_SPECS = {"A5": A5_SPEC, "PSL25": PSL_SPEC}


@pytest.fixture(scope="module")
def a5_constants():
    return C.constants(A5_SPEC, C.crude_overrides(A5_SPEC))


@pytest.fixture(scope="module")
def constants_by_name(a5_constants):
    out = {"A5": a5_constants, "PSL25": C.constants(PSL_SPEC, C.crude_overrides(PSL_SPEC))}
    sl = TowerSpec(F.sl25_on_vectors())
    out["SL25"] = (sl, C.constants(sl, C.crude_overrides(sl)))
    return out


@pytest.fixture(scope="module")
def a5_certificate(a5_constants):
    return C.certified_k(A5_SPEC, a5_constants)


# ---------------------------------------------------------------------------
# decisions


def test_decide_a5_yes():
    v = C.decide(A5_SPEC)
    assert v.yes and v.perfect and v.orbit_sizes == [5] and not v.witnesses


def test_decide_c2_no_with_abelianization():
    v = C.decide(TowerSpec(F.cyclic(2)))
    assert v.decision == "NO" and not v.perfect
    assert [w["kind"] for w in v.to_json()["witnesses"]] == ["abelianization"]
    assert v.witnesses[0].verify(np.random.default_rng(3), 200)


def test_decide_fixed_point_no():
    v = C.decide(TowerSpec(F.a5_fixing_point()))
    assert v.decision == "NO" and v.perfect
    kinds = v.to_json()["witnesses"]
    assert kinds == [{"kind": "fixed_point", "level": 2, "point": 5}]
    assert "point 5" in v.reasons[0]


def test_decide_both_conditions_fail():
    g = PermGroup.from_cycles(3, "(0 1)")
    v = C.decide(TowerSpec(g))
    assert {w["kind"] for w in v.to_json()["witnesses"]} == {"abelianization", "fixed_point"}
    assert len(v.reasons) == 2


@pytest.mark.parametrize("name, F_group, decision", [
    ("A6", F.alternating(6), "YES"),
    ("S3", F.symmetric(3), "NO"),
    ("PSL25", F.psl25_on_projective_line(), "NO"),
    ("S5", F.symmetric(5), "NO"),
])
def test_decide_universal(name, F_group, decision):
    v = C.decide_universal(F_group)
    assert v.decision == decision
    if name == "PSL25":
        assert "order 10" in v.reasons[0] and not v.perfect
    if name == "A6":
        assert "order 60 on 5 points" in v.reasons[0]


def test_decide_universal_degree_guard():
    with pytest.raises(InputError):
        C.decide_universal(F.cyclic(2))


@pytest.mark.parametrize("g", [A5, F.psl25_on_projective_line(), F.cyclic(3), F.symmetric(3),
                               F.a5_fixing_point(), F.alternating(4)], ids=lambda g: g.name)
def test_decision_agrees_with_witness_constructions(g):
    spec = TowerSpec(g)
    v = C.decide(spec, verify_pairs=100)
    no_witness = abelianization_witness(spec, 1) is None and fixed_point_witness(spec, 1) is None
    assert v.yes == no_witness


def test_verdict_json_is_serializable():
    json.dumps(C.decide(TowerSpec(F.symmetric(3))).to_json())


# ---------------------------------------------------------------------------
# constants


def test_a5_constants(a5_constants):
    c = a5_constants
    assert (c.C1, c.C2, c.C3, c.C9) == (1, 2, 2, 2)
    # subgroups of the trivial quotient and of A5 itself
    assert c.C6 == 1 + 59
    assert c.case2_terms == [C.Case2Term(60, 60, 1, 2)]
    assert c.provenance["C7"] == "user-supplied" and c.provenance["C1"] == "computed-exact"


def test_c8_recomputed(a5_constants):
    c = a5_constants
    expected = Fraction(c.K + 1, 2) * log2_upper_int(c.C7) + c.K * log2_upper_int(c.degree)
    assert c.C8.log2 == expected


def test_c8_exact_for_small_values(a5_constants):
    c = C.ConstantsReport(**{**a5_constants.__dict__, "C7": 121, "K": 3})
    assert c.C8.exact == 121**2 * 5**3


def test_constants_missing_without_overrides():
    with pytest.raises(MissingConstantError) as info:
        C.constants(A5_SPEC)
    assert info.value.names == ("C7", "K")


def test_constants_refuse_no_specs():
    with pytest.raises(InputError):
        C.constants(TowerSpec(F.cyclic(3)))


def test_constants_unknown_override():
    with pytest.raises(InputError):
        C.constants(A5_SPEC, {**C.crude_overrides(A5_SPEC), "C5": 3})


def test_section_count_at_one_level(a5_constants):
    # sections of A5 inside A5 x A5 with trivial twisting: one per homomorphism A5 -> A5
    sections = lattice.hom_count(A5, A5)
    assert sections == 121
    sb = C.section_count_bound(A5_SPEC, [0], a5_constants)
    assert sb.log2_recursion == log2_upper_int(a5_constants.C7)
    assert sections <= a5_constants.C7


# ---------------------------------------------------------------------------
# case bounds


def test_case3_exact(a5_constants):
    cb = C.case_bounds(A5_SPEC, a5_constants, 1, 2)
    assert cb.cases["normalizer_T"].exact == Fraction(a5_constants.C6 * 1, 2**2 ** 2)
    assert cb.cases["normalizer_T"].exact == Fraction(15, 4)


def test_case1_exact(a5_constants):
    cb = C.case_bounds(A5_SPEC, a5_constants, 2, 3)
    assert cb.cases["graph_iso"].exact == Fraction(1 * 2 * 5**2, 2 ** (3 * 4))


def test_case4_non_convergent_flag(a5_constants):
    cb = C.case_bounds(A5_SPEC, a5_constants, 1, 5)
    assert not cb.flags["section_ratio_below_one"]
    assert not cb.majorants["section"].summable


def test_orbit_size_distribution():
    assert C.orbit_sizes(A5_SPEC, 3) == {125: 1}
    spec = TowerSpec(PermGroup.from_cycles(5, "(0 1)", "(2 3 4)"))
    assert C.orbit_sizes(spec, 2) == {4: 1, 6: 2, 9: 1}
    assert sum(C.orbit_sizes(spec, 4).values()) == spec.ell**4


@pytest.mark.parametrize("name", ["A5", "PSL25", "SL25"])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_exact_zeta_below_bound(constants_by_name, name, k):
    if name == "SL25":
        spec, consts = constants_by_name[name]
    else:
        spec, consts = YES_SPECS[name], constants_by_name[name]
    L = spec.base
    exact = genprob.zeta(L, genprob.trivial_map(L), k).total
    assert Bound.of(exact) <= C.case_bounds(spec, consts, 0, k).total


@pytest.mark.parametrize("name", ["A5", "PSL25"])
def test_total_non_increasing_in_k(constants_by_name, name):
    spec, consts = YES_SPECS[name], constants_by_name[name]
    for n in range(5):
        for k in (1, 2, 3, 7, 50, 1000, 10**6):
            assert C.case_bounds(spec, consts, n, k + 1).total <= C.case_bounds(spec, consts, n, k).total


@pytest.mark.parametrize("name", ["A5", "PSL25"])
def test_majorants_dominate(constants_by_name, name):
    spec, consts = YES_SPECS[name], constants_by_name[name]
    for k in (1, 2, 40, 10**6, 10**400):
        for n in range(7):
            cb = C.case_bounds(spec, consts, n, k)
            for case, b in cb.cases.items():
                m = cb.majorants[case]
                if m.summable:
                    assert b <= Bound.from_log2(m.log2_at(n)), (k, n, case)


def test_majorant_tail():
    m = C.Majorant(Fraction(3), Fraction(2), Fraction(1))
    start = m.halving_from()
    assert m.E * 2**start >= m.B + 1
    for n in range(start, start + 5):
        assert m.log2_at(n + 1) <= m.log2_at(n) - 1
    with pytest.raises(InputError):
        m.tail_from(start - 1)
    assert not C.Majorant(Fraction(0), Fraction(1), Fraction(-1)).summable


# ---------------------------------------------------------------------------
# section counting


@given(st.lists(st.sampled_from([2, 3, 5, 6]), min_size=1, max_size=10))
def test_alpha_beta_inequalities(sizes):
    alpha, beta = C.alpha_beta(sizes)
    tail = math.prod(sizes[2:])
    assert alpha <= 4 * tail and beta <= 2 * tail


def test_alpha_beta_small():
    assert C.alpha_beta([5]) == (0, 0)
    assert C.alpha_beta([5, 5]) == (1, 1)
    assert C.alpha_beta([2, 3, 4]) == (1 * 4 + 2, 4 + 1)


def test_section_bound_checks_two_orbits(a5_constants):
    g = PermGroup.from_cycles(5, "(0 1)", "(2 3 4)")
    spec = TowerSpec(g)
    consts = C.ConstantsReport(**{**a5_constants.__dict__, "degree": 5})
    for n in range(1, 11):
        for sig in itertools.islice(itertools.product(range(spec.ell), repeat=n), 64):
            sb = C.section_count_bound(spec, sig, consts)
            assert all(sb.checks.values()), (sig, sb.checks)
            assert sb.log2_recursion <= sb.log2_closed


def test_section_bound_requires_signature(a5_constants):
    with pytest.raises(InputError):
        C.section_count_bound(A5_SPEC, [], a5_constants)


# ---------------------------------------------------------------------------
# certificate


def test_certificate_flags(a5_certificate):
    cert = a5_certificate
    assert all(cert.flags.values())
    assert cert.k == max(cert.k1, cert.k2) and cert.k2 == 2
    assert cert.table[0].n == cert.n1 and cert.table[0].total.lt_one()
    assert cert.tail_lower_bound > 0 and isinstance(cert.tail_lower_bound, Fraction)


def test_certificate_k1_is_least(a5_constants, a5_certificate):
    assert C._plan(A5_SPEC, a5_constants, a5_certificate.k1 - 2, a5_certificate.horizon) is None


def test_certificate_tuple_generates(a5_certificate):
    from wreathgen.permcore import Permutation
    from wreathgen.tower import build_level
    level = build_level(A5_SPEC, a5_certificate.n1)
    gens = tuple(Permutation.from_cycles(c, level.degree) for c in a5_certificate.generating_tuple)
    assert PermGroup(level.degree, gens).order() == level.order()


def test_certificate_positive_partial_product(a5_certificate):
    cert = a5_certificate
    value = cert.pk_base
    for row in cert.table:
        assert row.total.lt_one()
        value *= 1 - row.total.upper(C.CLIP_BITS)
    assert value > 0


def test_certificate_json(a5_certificate):
    out = a5_certificate.to_json()
    assert out["schema"] == "wreathgen.certificate/1"
    assert out["tail_lower_bound"].count("/") == 1
    json.dumps(out)


def test_certificate_psl25():
    cert = C.certified_k(PSL_SPEC, overrides=C.crude_overrides(PSL_SPEC))
    assert all(cert.flags.values()) and cert.tail_lower_bound > 0


def test_certificate_refuses_no_spec():
    with pytest.raises(InputError):
        C.certified_k(TowerSpec(F.cyclic(2)))


def test_generator_count_a5():
    assert genprob.pk_exact(A5, 1) == 0
    assert genprob.find_generating_tuple(A5, 2, 1000, seed=0) is not None


def test_pk_lower_bound_union(a5_constants):
    assert C.pk_lower_bound(A5, 2) == Fraction(19, 30)
    # the union bound path for large k
    big = C.pk_lower_bound(A5, 10**4)
    assert 0 < big < 1 and big >= 1 - Fraction(21, 5**10**4) - Fraction(1, 2**64)
