"""Brute-force reference computations, deliberately independent of the package."""

from __future__ import annotations

from fractions import Fraction
from itertools import product


def compose(a, b):
    return tuple(a[i] for i in b)


def closure(gens, degree):
    ident = tuple(range(degree))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = compose(s, x)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


def elements(group):
    return closure([s.images for s in group.generators], group.degree)


def commutator_closure(elems, degree):
    def inv(a):
        out = [0] * len(a)
        for i, v in enumerate(a):
            out[v] = i
        return tuple(out)

    comms = {compose(compose(inv(a), inv(b)), compose(a, b)) for a in elems for b in elems}
    return closure(list(comms), degree)


def set_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def is_invariant(partition, gens):
    blocks = {frozenset(b) for b in partition}
    return all(frozenset(s(p) for p in b) in blocks for s in gens for b in blocks)


def two_generated_subgroups(group):
    """Subgroups generated by at most two elements (all of them for the fixtures used)."""
    elems = sorted(elements(group))
    out = set()
    for a in elems:
        for b in elems:
            if b >= a:
                out.add(frozenset(closure([a, b], group.degree)))
    return out


def pk_bruteforce(group, k):
    elems = sorted(elements(group))
    n = len(elems)
    hits = sum(len(closure(list(t), group.degree)) == n for t in product(elems, repeat=k))
    return Fraction(hits, n**k)
