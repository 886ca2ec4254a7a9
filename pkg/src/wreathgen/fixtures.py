"""Named small groups used by tests, the CLI and the self-test."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError
from .permcore import Permutation, PermGroup


def trivial(degree: int = 1) -> PermGroup:
    return PermGroup(degree, (), name="1")


def cyclic(n: int) -> PermGroup:
    if n < 1:
        raise InputError("cyclic group needs n >= 1")
    if n == 1:
        return trivial()
    return PermGroup(n, (Permutation(list(range(1, n)) + [0]),), name=f"C{n}")


def symmetric(n: int) -> PermGroup:
    if n < 2:
        return trivial(max(n, 1))
    cyc = Permutation(list(range(1, n)) + [0])
    swap = Permutation([1, 0] + list(range(2, n)))
    return PermGroup(n, (cyc, swap) if n > 2 else (swap,), name=f"S{n}")


def alternating(n: int) -> PermGroup:
    """A_n generated by an n- or (n-1)-cycle and (0 1 2)."""
    if n < 3:
        return trivial(max(n, 1))
    three = Permutation.from_cycles("(0 1 2)", n)
    if n == 3:
        return PermGroup(3, (three,), name="A3")
    long = "(" + " ".join(map(str, range(n) if n % 2 else range(1, n))) + ")"
    return PermGroup(n, (Permutation.from_cycles(long, n), three), name=f"A{n}")


def klein_four() -> PermGroup:
    return PermGroup.from_cycles(4, "(0 1)(2 3)", "(0 2)(1 3)", name="C2xC2")


def a5_fixing_point() -> PermGroup:
    """A_5 on six points, fixing 5."""
    return PermGroup.from_cycles(6, "(0 1 2 3 4)", "(0 1 2)", name="A5+fix")


def psl25_on_projective_line() -> PermGroup:
    """PSL(2,5) on the six points of the projective line; 5 plays infinity."""
    return PermGroup.from_cycles(6, "(0 1 2 3 4)", "(0 5)(1 4)", name="PSL(2,5)")


def sl25_on_vectors() -> PermGroup:
    """SL(2,5) acting on the 24 nonzero vectors of F_5^2 (perfect, centre of order 2)."""
    vecs = [(a, b) for a in range(5) for b in range(5) if (a, b) != (0, 0)]
    index = {v: i for i, v in enumerate(vecs)}

    def perm(m):
        (p, q), (r, s) = m
        return Permutation([index[((p * a + q * b) % 5, (r * a + s * b) % 5)] for a, b in vecs])

    return PermGroup(24, (perm(((1, 1), (0, 1))), perm(((0, 4), (1, 0)))), name="SL(2,5)")


def direct_product(*groups: PermGroup, name: str | None = None) -> PermGroup:
    """Direct product acting on the disjoint union of the domains."""
    degree = sum(g.degree for g in groups)
    gens = []
    offset = 0
    for g in groups:
        for s in g.generators:
            images = list(range(degree))
            for p in range(g.degree):
                images[offset + p] = offset + s(p)
            gens.append(Permutation(images))
        offset += g.degree
    label = name or "x".join(g.name or "?" for g in groups)
    return PermGroup(degree, tuple(gens), name=label)


# A relator is a word of (generator index, exponent) pairs.
Word = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class Presentation:
    """Generating permutations of a group together with defining relators."""

    group: PermGroup
    generators: tuple[Permutation, ...]
    relators: tuple[Word, ...]

    def evaluate(self, word: Word) -> Permutation:
        x = self.group.identity()
        for i, e in word:
            x = x * self.generators[i] ** e
        return x

    def holds(self) -> bool:
        """Relators are trivial and the generators generate the group."""
        sub = self.group.subgroup(self.generators)
        return (all(self.evaluate(w).is_identity() for w in self.relators)
                and sub.order() == self.group.order())


def von_dyck(group: PermGroup, s: str, t: str, m: int) -> Presentation:
    """<s, t | s^2, t^3, (st)^m>."""
    d = group.degree
    gens = (Permutation.from_cycles(s, d), Permutation.from_cycles(t, d))
    return Presentation(group, gens, (((0, 2),), ((1, 3),), ((0, 1), (1, 1)) * m))


def a5_presentation() -> Presentation:
    return von_dyck(alternating(5), "(0 1)(2 3)", "(1 2 4)", 5)


def s3_presentation() -> Presentation:
    return von_dyck(symmetric(3), "(0 1)", "(0 1 2)", 2)


def cyclic_presentation(n: int) -> Presentation:
    g = cyclic(n)
    return Presentation(g, g.generators, (((0, n),),))


def by_name(name: str) -> PermGroup:
    """Resolve names such as ``A5``, ``S3``, ``C4``, ``C2xC2``, ``PSL25``."""
    key = name.replace(" ", "").upper()
    special = {
        "1": trivial(), "TRIVIAL": trivial(), "C2XC2": klein_four(), "V4": klein_four(),
        "PSL25": psl25_on_projective_line(), "PSL(2,5)": psl25_on_projective_line(),
        "SL25": sl25_on_vectors(), "SL(2,5)": sl25_on_vectors(), "A5+FIX": a5_fixing_point(),
    }
    if key in special:
        return special[key]
    makers = {"C": cyclic, "S": symmetric, "A": alternating}
    if key[:1] in makers and key[1:].isdigit():
        return makers[key[0]](int(key[1:]))
    raise InputError(f"unknown group name {name!r}")


def small_groups() -> list[PermGroup]:
    """The fixture set of small groups (orders up to 120)."""
    return [trivial(), cyclic(2), cyclic(3), cyclic(4), cyclic(6), klein_four(), symmetric(3),
            alternating(4), symmetric(4), alternating(5), psl25_on_projective_line(),
            sl25_on_vectors(), symmetric(5)]


def presentations() -> list[Presentation]:
    return [a5_presentation(), s3_presentation()] + [cyclic_presentation(n) for n in (2, 3, 4, 6)]

