import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import is_invariant, set_partitions
from wreathgen import fixtures as F
from wreathgen import lattice as L
from wreathgen import semidirect as S
from wreathgen.errors import InputError
from wreathgen.finite import as_table
from wreathgen.permcore import Permutation, PermGroup

A5 = F.alternating(5)
A5xA5 = F.direct_product(A5, A5)
C2_ON_2 = PermGroup.from_cycles(2, "(0 1)")
C4_ON_4 = PermGroup.from_cycles(4, "(0 1 2 3)")
A4_IN_A5 = PermGroup.from_cycles(5, "(0 1 2)", "(0 1)(2 3)")


def wreath_a5_c2():
    return S.SemidirectGroup(S.SemidirectSpec(C2_ON_2, ((0, 1),), (A5,)))


def a5_squared_two_sets():
    return S.SemidirectGroup(S.SemidirectSpec(PermGroup(2, ()), ((0,), (1,)), (A5, A5)))


class TestConstruction:
    def test_order(self):
        assert wreath_a5_c2().order == 2 * 60**2

    def test_rejects_intransitive_set(self):
        with pytest.raises(InputError):
            S.SemidirectSpec(PermGroup(2, ()), ((0, 1),), (A5,))

    def test_rejects_non_perfect(self):
        with pytest.raises(InputError, match="perfect"):
            S.SemidirectSpec(C2_ON_2, ((0, 1),), (F.symmetric(3),))

    def test_rejects_overlapping_sets(self):
        with pytest.raises(InputError):
            S.SemidirectSpec(C2_ON_2, ((0, 1), (0, 1)), (A5, A5))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_structured_product_matches_permutations(self, seed):
        Y = S.SemidirectGroup(S.SemidirectSpec(C4_ON_4, ((0, 1, 2, 3),), (A5,)))
        rng = np.random.default_rng(seed)
        a, b = (Permutation(Y.group.chain.random_element(rng).images) for _ in range(2))
        sa, sb = Y.structured(a), Y.structured(b)
        assert Y.to_permutation(sa) == a
        assert Y.to_permutation(Y.mult(sa, sb)) == a * b

    def test_projection(self):
        Y = wreath_a5_c2()
        assert Y.surjects(Y.group)
        assert not Y.surjects(Y.base_group())


class TestStandardCore:
    def test_sl25_has_no_clean_maximal(self):
        sl = F.sl25_on_vectors()
        Y = S.SemidirectGroup(S.SemidirectSpec(PermGroup(1, ()), ((0,),), (sl,)))
        for cls in L.maximal_subgroups(sl):
            m = Y.standard([S.table_subgroup(sl, cls.representative.mask)])
            core = S.standard_core(Y, m)
            assert not core.clean
            assert [n.order() for n in core.normals] == [2]

    def test_core_of_power_normalizer_is_trivial(self):
        # conjugating by the base moves each A4 factor independently
        Y = wreath_a5_c2()
        m = S.normalizer_power(Y, A4_IN_A5)
        assert Y.core(m).order() == 1
        assert S.is_clean(Y, m)

    def test_core_of_normal_subgroup_is_itself(self):
        Y = wreath_a5_c2()
        assert Y.core(Y.base_group()).order() == 3600

    def test_base_group_is_not_clean(self):
        Y = wreath_a5_c2()
        assert not S.is_clean(Y, Y.base_group())


class TestGraphType:
    def test_diagonal_is_maximal_graph(self):
        Y = a5_squared_two_sets()
        iso = L.isomorphisms(as_table(A5), as_table(A5))[0]
        res = S.construct_graph_iso(Y, {0: 1}, [iso])
        assert (res.index, res.maximal, res.clean, res.surjects) == (60, True, True, True)
        rep = S.classify_maximal(Y, res.M)
        assert rep.case == "graph_iso" and rep.evidence == "exhaustive"
        assert rep.witnesses["sigma"] == {0: 1}
        assert rep.bound_holds and rep.index >= 60

    def test_class_count_attains_bound(self):
        count = S.count_graph_iso_classes(a5_squared_two_sets())
        assert (count.classes, count.bound, count.subgroups) == (2, 2, 120)

    def test_non_equivariant_sigma_rejected(self):
        X = PermGroup.from_cycles(4, "(0 1)")
        Y = S.SemidirectGroup(S.SemidirectSpec(X, ((0, 1), (2,)), (A5, A5)), enum_cap=10)
        iso = L.isomorphisms(as_table(A5), as_table(A5))[0]
        with pytest.raises(InputError, match="sizes"):
            S.construct_graph_iso(Y, {0: 2, 1: 2}, [iso, iso])

    def test_sigma_must_commute_with_x(self):
        X = PermGroup.from_cycles(4, "(0 1)", "(2 3)")
        Y = S.SemidirectGroup(S.SemidirectSpec(X, ((0, 1), (2, 3)), (A5, A5)), enum_cap=10)
        iso = L.isomorphisms(as_table(A5), as_table(A5))[0]
        # the two generators move the sets independently, so no bijection is equivariant
        with pytest.raises(InputError, match="equivariant"):
            S.construct_graph_iso(Y, {0: 2, 1: 3}, [iso, iso])


def _embeddings_a5_squared():
    return (tuple(A5xA5.generators[:2]), tuple(A5xA5.generators[2:]))


def _subdiagonal_fixtures():
    """(label, semidirect, data, exponent)."""
    big = 10
    out = []
    y1 = S.SemidirectGroup(S.SemidirectSpec(C2_ON_2, ((0, 1),), (A5,)))
    out.append(("c2-one-block", y1, S.SubdiagonalData(A5, (A5.generators,), (((0, 0), (0, 1)),)), 1))
    y2 = S.SemidirectGroup(S.SemidirectSpec(PermGroup(1, ()), ((0,),), (A5xA5,)))
    out.append(("trivial-two-factors", y2,
                S.SubdiagonalData(A5, _embeddings_a5_squared(), (((0, 0), (1, 0)),)), 1))
    y3 = S.SemidirectGroup(S.SemidirectSpec(C4_ON_4, ((0, 1, 2, 3),), (A5,)), enum_cap=big)
    out.append(("c4-two-pairs", y3,
                S.SubdiagonalData(A5, (A5.generators,), (((0, 0), (0, 2)), ((0, 1), (0, 3)))), 2))
    out.append(("c4-one-block", y3,
                S.SubdiagonalData(A5, (A5.generators,), (tuple((0, w) for w in range(4)),)), 3))
    y5 = S.SemidirectGroup(S.SemidirectSpec(C2_ON_2, ((0, 1),), (A5xA5,)), enum_cap=big)
    out.append(("c2-cross-pairs", y5,
                S.SubdiagonalData(A5, _embeddings_a5_squared(),
                                  (((0, 0), (1, 1)), ((0, 1), (1, 0)))), 2))
    out.append(("c2-two-factors-one-block", y5,
                S.SubdiagonalData(A5, _embeddings_a5_squared(),
                                  (((0, 0), (0, 1), (1, 0), (1, 1)),)), 3))
    odd = Permutation.from_cycles("(3 4)", 5)
    outer = {(0, 1): tuple(odd * g * odd for g in A5.generators)}
    out.append(("c2-outer-twist", y1,
                S.SubdiagonalData(A5, (A5.generators,), (((0, 0), (0, 1)),), outer), 1))
    return out


SUBDIAGONAL = _subdiagonal_fixtures()


class TestSubdiagonal:
    @pytest.mark.parametrize("label, Y, data, exponent", SUBDIAGONAL, ids=[f[0] for f in SUBDIAGONAL])
    def test_index_formula(self, label, Y, data, exponent):
        res = S.construct_subdiagonal(Y, data, check_maximal=False)
        r, size = data.r, len(Y.spec.omegas[0])
        assert res.details["exponent"] == exponent
        assert res.subgroup.order() * 60**exponent == 60 ** (r * size)

    def test_maximal_and_classified(self):
        Y = wreath_a5_c2()
        res = S.construct_subdiagonal(Y, SUBDIAGONAL[0][2])
        assert res.maximal and res.clean and res.surjects and res.index == 60
        rep = S.classify_maximal(Y, res.M)
        assert rep.case == "subdiagonal"
        w = rep.witnesses
        assert w["blocks"] == [((0, 0), (0, 1))] and w["index_matches"] and w["M_is_normalizer"]
        assert rep.index**2 >= rep.bound

    def test_outer_twist_gives_other_class(self):
        Y = wreath_a5_c2()
        plain = S.construct_subdiagonal(Y, SUBDIAGONAL[0][2])
        twisted = S.construct_subdiagonal(Y, SUBDIAGONAL[-1][2])
        assert twisted.maximal
        assert Y.class_count([Y.mask(plain.M), Y.mask(twisted.M)]) == 2

    def test_size_one_block_rejected(self):
        Y = wreath_a5_c2()
        data = S.SubdiagonalData(A5, (A5.generators,), (((0, 0),), ((0, 1),)))
        with pytest.raises(InputError, match="size 1"):
            S.construct_subdiagonal(Y, data)

    def test_non_invariant_partition_rejected(self):
        Y = S.SemidirectGroup(S.SemidirectSpec(C4_ON_4, ((0, 1, 2, 3),), (A5,)), enum_cap=10)
        data = S.SubdiagonalData(A5, (A5.generators,), (((0, 0), (0, 1)), ((0, 2), (0, 3))))
        with pytest.raises(InputError, match="invariant"):
            S.construct_subdiagonal(Y, data)

    def test_non_automorphism_rejected(self):
        Y = wreath_a5_c2()
        bad = {(0, 1): (Permutation.identity(5), Permutation.identity(5))}
        data = S.SubdiagonalData(A5, (A5.generators,), (((0, 0), (0, 1)),), bad)
        with pytest.raises(InputError):
            S.construct_subdiagonal(Y, data)

    def test_diagonal_of_two_factors_projects_properly(self):
        # with trivial X the diagonal of T x T projects onto a proper subgroup of B
        label, Y, data, _ = SUBDIAGONAL[1]
        res = S.construct_subdiagonal(Y, data)
        rep = S.classify_maximal(Y, res.M)
        assert rep.case == "normalizer_T" and rep.witnesses["T_order"] == 60


class TestNormalizerAndSection:
    def test_normalizer_of_a4_power(self):
        Y = wreath_a5_c2()
        res = S.construct_normalizer_T(Y, A4_IN_A5)
        assert res.maximal and res.clean and res.index == 25
        rep = S.classify_maximal(Y, res.M)
        assert rep.case == "normalizer_T" and rep.witnesses["M_is_normalizer"]
        assert rep.index >= (60 // 12) ** 2

    def test_non_maximal_when_normalizer_not_maximal(self):
        Y = wreath_a5_c2()
        res = S.construct_normalizer_T(Y, PermGroup.from_cycles(5, "(0 1)(2 3)"))
        assert res.maximal is False

    def test_normal_t_reports_reason(self):
        sl = F.sl25_on_vectors()
        center = S.table_subgroup(sl, as_table(sl).center())
        Y = S.SemidirectGroup(S.SemidirectSpec(PermGroup(1, ()), ((0,),), (sl,)))
        res = S.construct_normalizer_T(Y, center)
        assert res.maximal is False and "normal" in res.details["reason"]

    def test_section_case(self):
        X = F.a5_fixing_point()
        Y = S.SemidirectGroup(S.SemidirectSpec(X, ((5,),), (A5,)))
        gens = [Y.lift(x) * Y.leaf(0, 0, Permutation(x.images[:5])) for x in X.generators]
        m = PermGroup(Y.degree, tuple(gens))
        rep = S.classify_maximal(Y, m)
        assert rep.case == "section" and rep.maximal
        assert rep.witnesses["cocycle_identity"]
        assert S.case_predicates(Y, m) == {"graph_iso": False, "subdiagonal": False,
                                           "normalizer_T": False, "section": True}

    def test_non_clean_goes_through_quotient(self):
        sl = F.sl25_on_vectors()
        Y = S.SemidirectGroup(S.SemidirectSpec(PermGroup(1, ()), ((0,),), (sl,)))
        cls = L.maximal_subgroups(sl)[0]
        m = Y.standard([S.table_subgroup(sl, cls.representative.mask)])
        rep = S.classify_maximal(Y, m)
        assert not rep.clean and rep.case == "normalizer_T"
        assert rep.witnesses["standard_core_orders"] == [2]

    def test_report_json(self):
        Y = wreath_a5_c2()
        rep = S.classify_maximal(Y, S.normalizer_power(Y, A4_IN_A5))
        data = rep.to_json()
        assert data["case"] == "normalizer_T" and data["index"] == "25"


class TestExclusivity:
    def test_every_maximal_of_small_wreath_has_one_case(self):
        # maximal subgroups of A5 wr C2 surjecting onto C2, via its lattice of
        # candidates: normalizers of powers, subdiagonals, and their conjugates
        Y = wreath_a5_c2()
        candidates = [S.normalizer_power(Y, S.table_subgroup(A5, c.representative.mask))
                      for c in L.maximal_subgroups(A5)]
        candidates.append(S.construct_subdiagonal(Y, SUBDIAGONAL[0][2]).M)
        for m in candidates:
            preds = S.case_predicates(Y, m)
            assert sum(preds.values()) == 1
            rep = S.classify_maximal(Y, m)
            assert rep.maximal and rep.bound_holds


PARTITION_ACTIONS = {"1": PermGroup(1, ()), "C2": C2_ON_2, "C3": PermGroup.from_cycles(3, "(0 1 2)"),
                     "S3": F.symmetric(3), "C4": C4_ON_4, "V4": F.klein_four(), "A4": F.alternating(4)}
# the filter oracle walks all set partitions, so keep r·|Ω| at most 8
FILTER_CASES = [(name, r) for name, X in PARTITION_ACTIONS.items() for r in (1, 2, 3) if X.degree * r <= 8]


@pytest.mark.parametrize("name, r", FILTER_CASES, ids=[f"{n}-{r}" for n, r in FILTER_CASES])
def test_partition_counts_against_filter(name, r):
    X = PARTITION_ACTIONS[name]
    omega = tuple(range(X.degree))
    got = S.partition_bound(X, omega, r)
    act = S.copies_action(X, omega, r)
    expected = sum(is_invariant(p, act.generators) for p in set_partitions(range(act.degree)))
    assert got.a_r_omega == expected


def test_partition_bound_counterexample():
    # trivial action on one point: three copies give Bell(3) = 5 partitions
    pb = S.partition_bound(PermGroup(1, ()), (0,), 3)
    assert (pb.a_omega, pb.a_r_omega) == (1, 5)
    assert pb.stated == 4 and not pb.stated_holds
    assert pb.corrected_holds


def test_prefactors():
    assert S.partition_prefactors(1, 3) == (4, 4, 6)
    assert S.partition_prefactors(2, 1) == (1, 1, 1)
    assert S.partition_prefactors(3, 2)[2] == 4
    assert math.prod(1 + j for j in range(1, 4)) == S.partition_prefactors(1, 4)[2]
