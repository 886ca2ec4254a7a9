import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import commutator_closure, elements, is_invariant, set_partitions
from wreathgen import fixtures as F
from wreathgen.errors import CapError, InputError
from wreathgen.permcore import (
    Permutation,
    PermGroup,
    build_chain,
    derived_subgroup,
    group_from_json,
    group_to_json,
    block_systems,
    invariant_partitions,
    is_perfect,
    is_transitive,
    orbit,
    orbits,
    point_stabilizer,
    restrict,
)

A5 = F.alternating(5)


def perms(degree):
    return st.permutations(list(range(degree))).map(Permutation)


class TestPermutation:
    def test_cycle_parsing_composes_right_to_left(self):
        assert Permutation.from_cycles("(0 1)(1 2)", 3) == Permutation.from_cycles("(0 1 2)", 3)

    def test_rejects_non_bijection(self):
        with pytest.raises(InputError):
            Permutation([0, 0, 1])

    def test_str_roundtrip(self):
        p = Permutation.from_cycles("(0 3)(1 2 4)", 5)
        assert Permutation.from_cycles(str(p), 5) == p

    @given(perms(6), perms(6), perms(6))
    def test_associative(self, a, b, c):
        assert (a * b) * c == a * (b * c)

    @given(perms(7))
    def test_inverse(self, a):
        assert (a.inverse() * a).is_identity()
        assert (a ** a.order()).is_identity()

    @given(perms(5), perms(5))
    def test_left_action(self, a, b):
        assert all((a * b)(x) == a(b(x)) for x in range(5))


class TestOrbits:
    def test_a5_orbit(self):
        assert orbit(A5, 0) == {0, 1, 2, 3, 4}

    def test_trivial_orbit(self):
        assert orbit(PermGroup(3, ()), 2) == {2}

    def test_fixed_sixth_point(self):
        assert orbit(F.a5_fixing_point(), 5) == {5}

    def test_out_of_range(self):
        with pytest.raises(InputError):
            orbit(A5, 5)

    @pytest.mark.parametrize("g", F.small_groups() + [F.a5_fixing_point()], ids=lambda g: g.name)
    def test_orbits_partition_domain(self, g):
        parts = orbits(g)
        assert sum(len(o) for o in parts) == g.degree
        assert sorted(p for o in parts for p in o) == list(range(g.degree))


class TestChain:
    @pytest.mark.parametrize("g", F.small_groups() + [F.alternating(6)], ids=lambda g: g.name)
    def test_order_matches_enumeration(self, g):
        chain = g.chain
        assert chain.order == len(elements(g))
        assert math.prod(len(o) for o in chain.orbits) == chain.order
        assert math.factorial(g.degree) % chain.order == 0

    def test_trivial(self):
        assert PermGroup(3, ()).order() == 1

    def test_transversal_maps_base_point(self):
        chain = F.symmetric(5).chain
        for j, b in enumerate(chain.base):
            for p, u in chain.transversals[j].items():
                assert u[b] == p

    def test_generators_are_members(self):
        for g in F.small_groups():
            assert all(g.contains(s) for s in g.generators)

    def test_membership_examples(self):
        assert not A5.contains(Permutation.from_cycles("(0 1)", 5))
        assert A5.contains(Permutation.from_cycles("(0 1 2 3 4)", 5))
        assert A5.contains(Permutation.identity(5))

    def test_membership_matches_enumeration(self):
        inside = elements(A5)
        for p in elements(F.symmetric(5)):
            assert A5.contains(p) == (p in inside)

    def test_degree_mismatch(self):
        with pytest.raises(InputError):
            A5.contains(Permutation.identity(4))

    def test_deterministic(self):
        a = build_chain(A5.generators, 5)
        b = build_chain(A5.generators, 5)
        assert a.base == b.base and a.orbits == b.orbits

    @pytest.mark.parametrize("g", [A5, F.sl25_on_vectors(), F.alternating(6)], ids=lambda g: g.name)
    def test_closed_under_products(self, g):
        rng = np.random.default_rng(3)
        xs = g.chain.random_elements(1000, rng)
        ys = g.chain.random_elements(1000, rng)
        for x, y in zip(xs, ys):
            assert g.contains(Permutation(x[y]))

    def test_rank_matches_element_array(self):
        chain = F.symmetric(4).chain
        arr = chain.element_array()
        assert [chain.rank(tuple(r)) for r in arr] == list(range(24))
        assert (arr[0] == np.arange(4)).all()


class TestPerfect:
    def test_examples(self):
        assert is_perfect(A5)[0]
        assert not is_perfect(F.cyclic(2))[0]
        ok, derived = is_perfect(F.symmetric(3))
        assert not ok and derived.order() == 3

    @pytest.mark.parametrize("g", [g for g in F.small_groups() if g.order() <= 360] + [F.alternating(6)],
                             ids=lambda g: g.name)
    def test_matches_commutator_closure(self, g):
        elems = elements(g)
        oracle = commutator_closure(elems, g.degree) if len(elems) <= 120 else None
        d = derived_subgroup(g)
        if oracle is not None:
            assert d.order() == len(oracle)
        assert is_perfect(g)[0] == (d.order() == g.order())

    def test_a6_perfect(self):
        assert is_perfect(F.alternating(6))[0]


class TestSampling:
    def test_samples_are_members(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            assert A5.contains(A5.chain.random_element(rng))

    def test_s3_uniform(self):
        chain = F.symmetric(3).chain
        rng = np.random.default_rng(11)
        counts = {}
        for _ in range(6000):
            x = chain.random_element(rng)
            counts[x] = counts.get(x, 0) + 1
        assert len(counts) == 6
        sigma = math.sqrt(6000 * (1 / 6) * (5 / 6))
        assert all(abs(c - 1000) <= 5 * sigma for c in counts.values())
        chi2 = sum((c - 1000) ** 2 / 1000 for c in counts.values())
        assert chi2 < 20.5  # 5 d.o.f., p = 0.001

    def test_vectorised_uniform(self):
        chain = F.symmetric(3).chain
        arr = chain.random_elements(6000, np.random.default_rng(5))
        _, counts = np.unique(arr, axis=0, return_counts=True)
        assert len(counts) == 6 and ((counts - 1000) ** 2 / 1000).sum() < 20.5

    def test_same_seed_same_stream(self):
        a = [A5.chain.random_element(np.random.default_rng(9)) for _ in range(3)]
        r1, r2 = np.random.default_rng(4), np.random.default_rng(4)
        assert [A5.chain.random_element(r1) for _ in range(20)] == \
            [A5.chain.random_element(r2) for _ in range(20)]
        assert a[0] == a[1] == a[2]


class TestPartitions:
    def test_a5_only_trivial(self):
        parts = invariant_partitions(A5)
        assert len(parts) == 2
        assert ((0,), (1,), (2,), (3,), (4,)) in parts and ((0, 1, 2, 3, 4),) in parts

    def test_trivial_group_bell(self):
        assert len(invariant_partitions(PermGroup(3, ()))) == 5

    def test_double_transposition_against_filter(self):
        g = PermGroup.from_cycles(4, "(0 1)(2 3)")
        all_parts = list(set_partitions(range(4)))
        assert len(all_parts) == 15
        expected = sum(is_invariant(p, g.generators) for p in all_parts)
        assert len(invariant_partitions(g)) == expected

    @pytest.mark.parametrize("g", [F.cyclic(4), F.cyclic(6), F.klein_four(), F.symmetric(4),
                                   PermGroup.from_cycles(6, "(0 1)(2 3)(4 5)", "(0 2 4)(1 3 5)")],
                             ids=str)
    def test_matches_filter(self, g):
        expected = {frozenset(map(frozenset, p)) for p in set_partitions(range(g.degree))
                    if is_invariant(p, g.generators)}
        got = {frozenset(map(frozenset, p)) for p in invariant_partitions(g)}
        assert got == expected

    def test_subdomain(self):
        g = PermGroup.from_cycles(5, "(0 1)", "(2 3 4)")
        assert len(invariant_partitions(g, [2, 3, 4])) == 2

    def test_cap(self):
        with pytest.raises(CapError, match="partition cap"):
            invariant_partitions(F.symmetric(13))

    def test_non_invariant_domain(self):
        with pytest.raises(InputError):
            invariant_partitions(A5, [0, 1])


class TestBlockSystems:
    @pytest.mark.parametrize("g", [F.cyclic(4), F.cyclic(6), F.klein_four(), F.symmetric(4), A5,
                                   F.psl25_on_projective_line(),
                                   PermGroup.from_cycles(8, "(0 1 2 3 4 5 6 7)"),
                                   PermGroup.from_cycles(6, "(0 1)(2 3)(4 5)", "(0 2 4)(1 3 5)")],
                             ids=str)
    def test_agrees_with_partition_search(self, g):
        ours = {frozenset(map(frozenset, p)) for p in block_systems(g, range(g.degree))}
        assert ours == {frozenset(map(frozenset, p)) for p in invariant_partitions(g)}

    def test_beyond_partition_cap(self):
        # cyclic group of order 24: one system per divisor
        g = F.cyclic(24)
        assert len(block_systems(g, range(24))) == 8
        assert len(block_systems(F.sl25_on_vectors(), range(24))) > 2

    def test_needs_an_orbit(self):
        with pytest.raises(InputError):
            block_systems(PermGroup.from_cycles(4, "(0 1)"), range(4))


class TestMisc:
    def test_point_stabilizer(self):
        stab = point_stabilizer(F.alternating(6), 0)
        assert stab.order() == 60
        assert all(s(0) == 0 for s in stab.generators)
        assert restrict(stab, range(1, 6)).order() == 60

    def test_transitivity(self):
        assert is_transitive(A5) and not is_transitive(F.a5_fixing_point())

    def test_json_roundtrip(self):
        g = group_from_json(group_to_json(A5))
        assert g.order() == 60 and g.generators == A5.generators

    def test_json_cycle_strings(self):
        g = group_from_json({"degree": 5, "generators": ["(0 1 2 3 4)", "(0 1 2)"]})
        assert g.order() == 60

    def test_json_malformed(self):
        with pytest.raises(InputError):
            group_from_json({"generators": []})

    def test_content_hash_stable(self):
        assert F.alternating(5).content_hash() == F.alternating(5).content_hash()
        assert A5.content_hash() != F.symmetric(5).content_hash()

    @settings(max_examples=30, deadline=None)
    @given(st.lists(perms(6), min_size=1, max_size=3))
    def test_random_groups_chain_consistent(self, gens):
        g = PermGroup(6, tuple(gens))
        assert g.order() == len(elements(g))
