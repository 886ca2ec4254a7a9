"""Exhaustive subgroup machinery for small groups.

Everything here works on :class:`~wreathgen.finite.TableGroup` values; a
:class:`PermGroup` argument is tabulated first. Probabilities are exact
``Fraction`` values throughout.
"""

from __future__ import annotations

import itertools
import math
import weakref
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import CapError, InputError
from .permcore import PermGroup
from .finite import Hom, TableGroup, as_table, extend_to_hom, mask_from_bool, popcount

DEFAULT_LATTICE_CAP = 2000
DEFAULT_SEARCH_CAP = 10**6


@dataclass(frozen=True)
class Subgroup:
    mask: int
    order: int
    generators: tuple[int, ...]

    def __contains__(self, a: int) -> bool:
        return bool((self.mask >> a) & 1)

    def le(self, other: Subgroup) -> bool:
        return self.mask & ~other.mask == 0


def _sort_key(G: TableGroup, mask: int):
    return (popcount(mask), tuple(G.indices(mask).tolist()))


def conjugacy_orbits(G: TableGroup, masks: Sequence[int]) -> list[list[int]]:
    """Partition ``masks`` into orbits under conjugation (orbits may leave the list)."""
    index = {m: i for i, m in enumerate(masks)}
    seen: set[int] = set()
    out = []
    for m in masks:
        if m in seen:
            continue
        orbit = [m]
        seen.add(m)
        k = 0
        while k < len(orbit):
            cur = orbit[k]
            for g in G.generators:
                c = G.conjugate_mask(cur, g)
                if c not in seen:
                    seen.add(c)
                    orbit.append(c)
            k += 1
        out.append([x for x in orbit if x in index])
    return out


@dataclass
class SubgroupLattice:
    group: TableGroup
    nodes: list[Subgroup]
    classes: list[list[int]]
    class_of: list[int]
    mobius: dict[int, int]

    @property
    def order(self) -> int:
        return self.group.n

    def __len__(self) -> int:
        return len(self.nodes)

    def node_of(self, mask: int) -> int:
        return self._index[mask]

    @cached_property
    def _index(self) -> dict[int, int]:
        return {h.mask: i for i, h in enumerate(self.nodes)}

    def inclusion_pairs(self) -> list[tuple[int, int]]:
        """All pairs ``(i, j)`` with ``nodes[i]`` a proper subgroup of ``nodes[j]``."""
        out = []
        for i, h in enumerate(self.nodes):
            for j, k in enumerate(self.nodes):
                if i != j and h.order < k.order and k.order % h.order == 0 and h.le(k):
                    out.append((i, j))
        return out

    def normal_nodes(self) -> list[int]:
        return [cls[0] for cls in self.classes if len(cls) == 1]

    def class_representative(self, c: int) -> int:
        return min(self.classes[c], key=lambda i: _sort_key(self.group, self.nodes[i].mask))


def all_subgroups(g, cap: int = DEFAULT_LATTICE_CAP) -> SubgroupLattice:
    """Every subgroup, by cyclic seeding and closure under joins with cyclic subgroups."""
    G = as_table(g)
    if G.n > cap:
        raise CapError("lattice cap", cap, G.n, "all_subgroups")
    cached = _LATTICES.get(G)
    if cached is None:
        cached = _LATTICES[G] = _build_lattice(G)
    return cached


_LATTICES: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()


def _build_lattice(G: TableGroup) -> SubgroupLattice:
    cyclic: dict[int, int] = {}
    for a in range(G.n):
        m = G.closure([a])
        cyclic.setdefault(m, a)
    found: dict[int, tuple[int, ...]] = {m: ((a,) if a else ()) for m, a in cyclic.items()}
    queue = list(found)
    cyc_items = list(cyclic.items())
    while queue:
        H = queue.pop()
        gens = found[H]
        for C, c in cyc_items:
            if C & ~H == 0:
                continue
            J = G.join(H, (c,))
            if J not in found:
                found[J] = gens + (c,)
                queue.append(J)
    masks = sorted(found, key=lambda m: _sort_key(G, m))
    nodes = [Subgroup(m, popcount(m), found[m]) for m in masks]
    index = {h.mask: i for i, h in enumerate(nodes)}
    class_of = [-1] * len(nodes)
    classes = []
    for orbit in conjugacy_orbits(G, masks):
        ids = sorted(index[m] for m in orbit)
        for i in ids:
            class_of[i] = len(classes)
        classes.append(ids)
    mobius = _mobius(nodes, classes)
    return SubgroupLattice(G, nodes, classes, class_of, mobius)


def _mobius(nodes: Sequence[Subgroup], classes: Sequence[Sequence[int]]) -> dict[int, int]:
    """μ(H, top) for nodes sorted by increasing order, the last being the top.

    μ is constant on conjugacy classes, so one member per class is enough.
    Only nonzero values enter the recursion.
    """
    class_of = {}
    for c, ids in enumerate(classes):
        for i in ids:
            class_of[i] = c
    mu: dict[int, int] = {}
    nonzero: list[int] = []
    done: set[int] = set()
    for i in range(len(nodes) - 1, -1, -1):
        c = class_of[i]
        if c in done:
            continue
        done.add(c)
        h = nodes[i]
        s = 0
        for j in nonzero:
            k = nodes[j]
            if k.order > h.order and k.order % h.order == 0 and h.mask & ~k.mask == 0:
                s += mu[j]
        value = 1 if i == len(nodes) - 1 else -s
        for j in classes[c]:
            mu[j] = value
        if value:
            nonzero.extend(classes[c])
    return mu


# ---------------------------------------------------------------------------
# maximal subgroups


@dataclass(frozen=True)
class MaximalClass:
    representative: Subgroup
    index: int
    class_size: int
    members: tuple[int, ...] = field(repr=False)


def _classes_from_masks(G: TableGroup, masks: Sequence[int]) -> list[MaximalClass]:
    out = []
    for orbit in conjugacy_orbits(G, list(masks)):
        rep = min(orbit, key=lambda m: _sort_key(G, m))
        order = popcount(rep)
        out.append(MaximalClass(Subgroup(rep, order, tuple(G.subgroup_generators(rep))),
                                G.n // order, len(orbit), tuple(sorted(orbit))))
    out.sort(key=lambda c: (c.index, _sort_key(G, c.representative.mask)))
    return out


def maximal_masks_from_lattice(lat: SubgroupLattice) -> list[int]:
    top = len(lat.nodes) - 1
    proper = lat.nodes[:top]
    out = []
    for i, h in enumerate(proper):
        if not any(k.order > h.order and k.order % h.order == 0 and h.le(k) for k in proper[i + 1:]):
            out.append(h.mask)
    return out


def maximal_masks(g, cap: int = DEFAULT_LATTICE_CAP) -> list[int]:
    """All proper maximal subgroups (every conjugate) as masks."""
    G = as_table(g)
    if G.n == 1:
        return []
    if G.n <= cap:
        return maximal_masks_from_lattice(all_subgroups(G, cap))
    if G.factors is not None:
        return direct_product_maximal_masks(G, cap)
    raise CapError("lattice cap", cap, G.n, "maximal_subgroups")


def maximal_subgroups(g, cap: int = DEFAULT_LATTICE_CAP) -> list[MaximalClass]:
    """Conjugacy classes of maximal subgroups, sorted by index."""
    G = as_table(g)
    return _classes_from_masks(G, maximal_masks(G, cap))


def conjugacy_classes(G: TableGroup) -> list[np.ndarray]:
    seen = np.zeros(G.n, dtype=bool)
    out = []
    everyone = np.arange(G.n)
    for a in range(G.n):
        if seen[a]:
            continue
        cls = np.unique(G.table[G.table[everyone, a], G.inv])
        seen[cls] = True
        out.append(cls)
    return out


def normal_masks(g, cap: int = DEFAULT_LATTICE_CAP) -> list[int]:
    """All normal subgroups; beyond the lattice cap they come from class closures."""
    G = as_table(g)
    if G.n <= cap:
        lat = all_subgroups(G, cap)
        return [lat.nodes[i].mask for i in lat.normal_nodes()]
    # every normal subgroup is a product of normal closures of classes
    found = {1}
    for cls in conjugacy_classes(G):
        found.add(G.closure(cls.tolist()))
    frontier = list(found)
    while frontier:
        fresh = []
        for a in frontier:
            for b in list(found):
                prod = np.zeros(G.n, dtype=bool)
                prod[G.table[np.ix_(G.indices(a), G.indices(b))].ravel()] = True
                m = mask_from_bool(prod)
                if m not in found:
                    found.add(m)
                    fresh.append(m)
        frontier = fresh
    return sorted(found, key=lambda m: (popcount(m), m))


def is_simple(g, cap: int = DEFAULT_LATTICE_CAP) -> bool:
    G = as_table(g)
    return G.n > 1 and len(normal_masks(G, cap)) == 2


def maximal_normal_masks(G: TableGroup, cap: int = DEFAULT_LATTICE_CAP) -> list[int]:
    """Normal subgroups with simple quotient."""
    norms = [m for m in normal_masks(G, cap) if m != G.full_mask()]
    return [m for m in norms if not any(m != o and m & ~o == 0 for o in norms)]


def minimal_normal_masks(G: TableGroup, cap: int = DEFAULT_LATTICE_CAP) -> list[int]:
    norms = [m for m in normal_masks(G, cap) if m != 1]
    return [m for m in norms if not any(m != o and o & ~m == 0 for o in norms)]


def _cheap_generators(G: TableGroup, tries: int = 64) -> list[int]:
    """A generating set whose images are cheap to search: a pair from rare orders if one works."""
    gens = list(G.generators)
    if len(gens) <= 1:
        return gens
    orders = G.element_orders
    values, counts = np.unique(orders, return_counts=True)
    rarity = dict(zip(values.tolist(), counts.tolist()))
    ranked = sorted(range(1, G.n), key=lambda x: (rarity[int(orders[x])], x))
    best, cost = gens, math.prod(rarity[int(orders[s])] for s in gens)
    for a in ranked[:tries]:
        for b in ranked:
            c = rarity[int(orders[a])] * rarity[int(orders[b])]
            if c >= cost:
                break
            if G.closure_size([a, b]) == G.n:
                best, cost = [a, b], c
                break
    return best


def isomorphisms(G: TableGroup, H: TableGroup, search_cap: int = DEFAULT_SEARCH_CAP) -> list[Hom]:
    """All isomorphisms ``G -> H`` by generator-image search."""
    if G.n != H.n:
        return []
    gens = _cheap_generators(G)
    if not gens:
        return [Hom(G, H, np.zeros(1, dtype=np.int64))]
    orders_h = H.element_orders
    cands = [np.flatnonzero(orders_h == G.element_order(s)).tolist() for s in gens]
    total = 1
    for c in cands:
        total *= len(c)
    if total > search_cap:
        raise CapError("search cap", search_cap, total, "isomorphism search")
    out = []
    for imgs in itertools.product(*cands):
        h = extend_to_hom(G, H, imgs, gens)
        if h is not None and len(np.unique(h.images)) == H.n:
            out.append(h)
    return out


def direct_product_maximal_masks(P: TableGroup, cap: int = DEFAULT_LATTICE_CAP) -> list[int]:
    """Maximal subgroups of ``G1 x G2`` via Goursat's lemma.

    They are ``M1 x G2``, ``G1 x M2`` and the fibre products over a common
    simple quotient.
    """
    G1, G2 = P.factors
    n2 = G2.n
    out = []
    for m1 in maximal_masks(G1, cap):
        idx = G1.indices(m1)
        sel = (idx[:, None] * n2 + np.arange(n2)[None, :]).ravel()
        arr = np.zeros(P.n, dtype=bool)
        arr[sel] = True
        out.append(mask_from_bool(arr))
    for m2 in maximal_masks(G2, cap):
        idx = G2.indices(m2)
        sel = (np.arange(G1.n)[:, None] * n2 + idx[None, :]).ravel()
        arr = np.zeros(P.n, dtype=bool)
        arr[sel] = True
        out.append(mask_from_bool(arr))
    quots2 = [(N2,) + G2.quotient(N2) for N2 in maximal_normal_masks(G2, cap)]
    for N1 in maximal_normal_masks(G1, cap):
        Q1, lab1 = G1.quotient(N1)
        for N2, Q2, lab2 in quots2:
            for theta in isomorphisms(Q1, Q2):
                a = np.arange(P.n)
                ok = theta.images[lab1[a // n2]] == lab2[a % n2]
                out.append(mask_from_bool(ok))
    return out


# ---------------------------------------------------------------------------
# generation probabilities via the Möbius function


def pk_from_lattice(lat: SubgroupLattice, k: int) -> Fraction:
    n = lat.order
    return sum((Fraction(mu) * Fraction(lat.nodes[i].order, n) ** k
                for i, mu in lat.mobius.items() if mu), Fraction(0))


def intersection_closure(G: TableGroup, maximals: Sequence[int]) -> list[int]:
    """The group together with all intersections of maximal subgroups."""
    full = G.full_mask()
    found = {full, *maximals}
    layer = set(maximals)
    while layer:
        new = set()
        for a in layer:
            for m in maximals:
                x = a & m
                if x not in found:
                    new.add(x)
        found |= new
        layer = new
    return sorted(found, key=popcount)


def crosscut_mobius(G: TableGroup, maximals: Sequence[int]) -> list[tuple[int, int]]:
    """``(mask, μ(H, G))`` for every intersection of maximal subgroups.

    Subgroups outside this family have μ = 0, and the values on it agree with
    the full lattice.
    """
    masks = intersection_closure(G, maximals)
    nodes = [Subgroup(m, popcount(m), ()) for m in masks]
    index = {m: i for i, m in enumerate(masks)}
    classes = [[index[m] for m in orbit] for orbit in conjugacy_orbits(G, masks)]
    mu = _mobius(nodes, classes)
    return [(nodes[i].mask, v) for i, v in mu.items()]


def pk_exact_mobius(g, k: int, cap: int = DEFAULT_LATTICE_CAP) -> Fraction:
    """p_k(G) = Σ_H μ(H, G) (|H|/|G|)^k, exact."""
    if k < 1:
        raise InputError("k must be positive")
    G = as_table(g)
    if G.n == 1:
        return Fraction(1)
    if G.n <= cap:
        return pk_from_lattice(all_subgroups(G, cap), k)
    terms = crosscut_mobius(G, maximal_masks(G, cap))
    return sum((Fraction(mu) * Fraction(popcount(m), G.n) ** k for m, mu in terms if mu),
               Fraction(0))


# ---------------------------------------------------------------------------
# automorphisms and homomorphisms


@dataclass
class AutomorphismGroup:
    group: TableGroup
    generator_images: list[tuple[int, ...]]
    maps: list[np.ndarray] = field(repr=False)
    inner_order: int

    @property
    def order(self) -> int:
        return len(self.maps)

    @property
    def out_order(self) -> int:
        if self.order % self.inner_order:
            raise InputError("inner automorphism count does not divide |Aut|")
        return self.order // self.inner_order

    def compose(self, i: int, j: int) -> np.ndarray:
        """Images of the automorphism maps[i] ∘ maps[j]."""
        return self.maps[i][self.maps[j]]

    def index_of(self, images: np.ndarray) -> int | None:
        key = tuple(int(images[s]) for s in self.group.generators)
        try:
            return self.generator_images.index(key)
        except ValueError:
            return None


def automorphisms(g, cap: int = DEFAULT_LATTICE_CAP,
                  search_cap: int = DEFAULT_SEARCH_CAP) -> AutomorphismGroup:
    G = as_table(g)
    if G.n > cap:
        raise CapError("lattice cap", cap, G.n, "automorphisms")
    isos = isomorphisms(G, G, search_cap)
    imgs = [tuple(int(h.images[s]) for s in G.generators) for h in isos]
    inner = G.n // popcount(G.center())
    return AutomorphismGroup(G, imgs, [h.images for h in isos], inner)


def out_order(g, cap: int = DEFAULT_LATTICE_CAP) -> int:
    return automorphisms(g, cap).out_order


Word = Sequence[tuple[int, int]]


def _eval_word(T: TableGroup, images: Sequence[int], word: Word) -> int:
    x = 0
    for gi, e in word:
        a = images[gi]
        if e < 0:
            a = int(T.inv[a])
            e = -e
        for _ in range(e):
            x = int(T.table[x, a])
    return x


def hom_count(source, target, presentation=None,
              cap: int = DEFAULT_LATTICE_CAP * 50,
              search_cap: int = DEFAULT_SEARCH_CAP) -> int:
    """Number of homomorphisms ``source -> target``.

    Generator images are searched among target elements of compatible order.
    With a ``presentation`` (see :mod:`wreathgen.fixtures`), its generators
    are used and its relators prune candidates; every survivor is still
    checked against the whole multiplication table of the source.
    """
    S = as_table(source)
    T = as_table(target, cap)
    if T.n > cap:
        raise CapError("target cap", cap, T.n, "hom_count")
    relators: Sequence[Word] = ()
    gens = list(S.generators)
    if presentation is not None:
        if not isinstance(source, PermGroup) or not all(
                p.degree == source.degree and source.contains(p) for p in presentation.generators):
            raise InputError("presentation generators are not elements of the source")
        chain = source.chain
        gens = [chain.rank(p) for p in presentation.generators]
        if S.closure_size(gens) != S.n:
            raise InputError("presentation generators do not generate the source")
        relators = presentation.relators
    if not gens:
        return 1
    orders_t = T.element_orders
    cands = [np.flatnonzero(S.element_order(s) % orders_t == 0).tolist() for s in gens]
    total = 1
    for c in cands:
        total *= len(c)
    if total > search_cap:
        raise CapError("search cap", search_cap, total, "hom_count")
    count = 0
    for imgs in itertools.product(*cands):
        if any(_eval_word(T, imgs, w) != 0 for w in relators):
            continue
        if extend_to_hom(S, T, imgs, gens) is not None:
            count += 1
    return count
