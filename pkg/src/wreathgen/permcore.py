"""Permutations, permutation groups and stabilizer chains.

Points are ``0..degree-1``. A permutation is stored as its full image tuple and
acts on the left: ``(a * b)(x) == a(b(x))``. Cycle notation is only used for
parsing and printing.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from operator import itemgetter
from typing import Iterable, Sequence

import numpy as np

from .errors import CapError, InputError

DEFAULT_PARTITION_CAP = 12


def _compose(a: tuple, b: tuple) -> tuple:
    """Image tuple of a∘b."""
    if len(b) == 1:
        return (a[b[0]],)
    return itemgetter(*b)(a)


def _invert(a: tuple) -> tuple:
    inv = [0] * len(a)
    for i, x in enumerate(a):
        inv[x] = i
    return tuple(inv)


def _first_moved(a: tuple) -> int | None:
    for i, x in enumerate(a):
        if i != x:
            return i
    return None


class Permutation:
    """A bijection of ``{0..degree-1}`` given by its image array."""

    __slots__ = ("images", "_hash")

    def __init__(self, images: Iterable[int], *, check: bool = True):
        images = tuple(int(x) for x in images)
        if check:
            if not images:
                raise InputError("permutation of degree 0")
            if sorted(images) != list(range(len(images))):
                raise InputError(f"not a permutation: {images!r}")
        self.images = images
        self._hash = None

    @classmethod
    def identity(cls, degree: int) -> Permutation:
        return cls(range(degree), check=False)

    @classmethod
    def from_cycles(cls, text: str, degree: int | None = None) -> Permutation:
        """Parse ``"(0 1 2)(3 4)"``; commas may separate points."""
        cycles = []
        stripped = text.strip()
        if stripped and not re.fullmatch(r"(\(\s*[\d\s,]*\)\s*)+", stripped):
            raise InputError(f"cannot parse cycle notation {text!r}")
        for body in re.findall(r"\(([^)]*)\)", stripped):
            pts = [int(t) for t in re.split(r"[\s,]+", body.strip()) if t]
            if len(set(pts)) != len(pts):
                raise InputError(f"repeated point in cycle {body!r}")
            if pts:
                cycles.append(pts)
        top = max((max(c) for c in cycles), default=-1) + 1
        if degree is None:
            degree = max(top, 1)
        elif top > degree:
            raise InputError(f"cycle point {top - 1} outside degree {degree}")
        # rightmost cycle acts first
        result = tuple(range(degree))
        for cyc in cycles:
            c = list(range(degree))
            for i, p in enumerate(cyc):
                c[p] = cyc[(i + 1) % len(cyc)]
            result = _compose(result, tuple(c))
        return cls(result, check=False)

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, point: int) -> int:
        return self.images[point]

    def __mul__(self, other: Permutation) -> Permutation:
        if not isinstance(other, Permutation):
            return NotImplemented
        if other.degree != self.degree:
            raise InputError(f"degree mismatch {self.degree} vs {other.degree}")
        return Permutation(_compose(self.images, other.images), check=False)

    def inverse(self) -> Permutation:
        return Permutation(_invert(self.images), check=False)

    def __pow__(self, n: int) -> Permutation:
        base = self if n >= 0 else self.inverse()
        result = Permutation.identity(self.degree)
        n = abs(n)
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def is_identity(self) -> bool:
        return all(i == x for i, x in enumerate(self.images))

    def order(self) -> int:
        return math.lcm(*(len(c) for c in self.cycles())) if not self.is_identity() else 1

    def cycles(self) -> list[tuple[int, ...]]:
        seen = set()
        out = []
        for i in range(self.degree):
            if i in seen or self.images[i] == i:
                continue
            cyc = [i]
            seen.add(i)
            j = self.images[i]
            while j != i:
                cyc.append(j)
                seen.add(j)
                j = self.images[j]
            out.append(tuple(cyc))
        return out

    def support(self) -> list[int]:
        return [i for i, x in enumerate(self.images) if i != x]

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self.images == other.images

    def __lt__(self, other: Permutation) -> bool:
        return self.images < other.images

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.images)
        return self._hash

    def __str__(self) -> str:
        cyc = self.cycles()
        return "".join("(" + " ".join(map(str, c)) + ")" for c in cyc) or "()"

    def __repr__(self) -> str:
        return f"Permutation({list(self.images)})"


def _as_images(p) -> tuple:
    if isinstance(p, Permutation):
        return p.images
    return tuple(p)


# ---------------------------------------------------------------------------
# Schreier-Sims


class _Level:
    __slots__ = ("point", "gens", "orbit", "trans", "inv", "checked")

    def __init__(self, point: int):
        self.point = point
        self.gens: list[tuple] = []
        self.orbit: list[int] = []
        self.trans: dict[int, tuple] = {}
        self.inv: dict[int, tuple] = {}
        self.checked: set[tuple[int, int]] = set()

    def seed(self, identity: tuple):
        self.orbit = [self.point]
        self.trans = {self.point: identity}
        self.inv = {self.point: identity}

    def _extend_from(self, start: int, gens: Sequence[tuple]):
        # BFS over orbit[start:] with the given generators
        i = start
        while i < len(self.orbit):
            p = self.orbit[i]
            u = self.trans[p]
            for s in gens:
                q = s[p]
                if q not in self.trans:
                    v = _compose(s, u)
                    self.trans[q] = v
                    self.inv[q] = _invert(v)
                    self.orbit.append(q)
            i += 1

    def add_gen(self, s: tuple):
        self.gens.append(s)
        old = len(self.orbit)
        # new generator applied to the old points, then close everything new
        for p in self.orbit[:old]:
            q = s[p]
            if q not in self.trans:
                v = _compose(s, self.trans[p])
                self.trans[q] = v
                self.inv[q] = _invert(v)
                self.orbit.append(q)
        self._extend_from(old, self.gens)


def _strip(g: tuple, levels: list[_Level], start: int) -> tuple[tuple, int]:
    for j in range(start, len(levels)):
        lvl = levels[j]
        b = g[lvl.point]
        if b == lvl.point:
            continue
        inv = lvl.inv.get(b)
        if inv is None:
            return g, j
        g = _compose(inv, g)
    return g, len(levels)


def _schreier_sims(gens: Sequence[tuple], degree: int, base_prefix: Sequence[int] = (),
                   target_order: int | None = None) -> tuple[list[_Level], bool]:
    """Deterministic Schreier-Sims.

    Returns the levels and a flag telling whether the chain was completed. With
    ``target_order`` the run stops as soon as the product of orbit lengths
    reaches it; that product never exceeds the true order, so reaching it proves
    the generated group has at least that order.
    """
    ident = tuple(range(degree))
    uniq = []
    seen = set()
    for g in gens:
        if g != ident and g not in seen:
            seen.add(g)
            uniq.append(g)
    levels: list[_Level] = []
    base: list[int] = []
    for b in base_prefix:
        if b in base:
            raise InputError(f"repeated base point {b}")
        base.append(b)
        levels.append(_Level(b))
    for g in uniq:
        if all(g[b] == b for b in base):
            p = _first_moved(g)
            base.append(p)
            levels.append(_Level(p))
    for lvl in levels:
        lvl.seed(ident)
    for g in uniq:
        for lvl in levels:
            lvl.gens.append(g)
            if g[lvl.point] != lvl.point:
                break
    for lvl in levels:
        lvl._extend_from(0, lvl.gens)

    def reached() -> bool:
        if target_order is None:
            return False
        prod = 1
        for lvl in levels:
            prod *= len(lvl.orbit)
        return prod >= target_order

    if reached():
        return levels, False
    i = len(levels) - 1
    while i >= 0:
        lvl = levels[i]
        found = None
        for p in lvl.orbit:
            up = lvl.trans[p]
            for si, s in enumerate(lvl.gens):
                key = (p, si)
                if key in lvl.checked:
                    continue
                lvl.checked.add(key)
                q = s[p]
                sg = _compose(lvl.inv[q], _compose(s, up))
                if sg == ident:
                    continue
                h, j = _strip(sg, levels, i + 1)
                if h != ident:
                    found = (h, j)
                    break
            if found is not None:
                break
        if found is None:
            i -= 1
            continue
        h, j = found
        if j == len(levels):
            new = _Level(_first_moved(h))
            new.seed(ident)
            levels.append(new)
        for l in range(i + 1, j + 1):
            levels[l].add_gen(h)
        if reached():
            return levels, False
        i = j
    return levels, True


@dataclass(frozen=True, eq=False)
class StabilizerChain:
    """Base, per-level orbits/transversals/generators, and the exact order."""

    degree: int
    base: tuple[int, ...]
    orbits: tuple[tuple[int, ...], ...]
    transversals: tuple[dict, ...]
    inverses: tuple[dict, ...]
    generators: tuple[tuple[tuple, ...], ...]
    order: int
    _arrays: tuple = field(repr=False, default=())

    @classmethod
    def _from_levels(cls, degree: int, levels: list[_Level]) -> StabilizerChain:
        order = 1
        for lvl in levels:
            order *= len(lvl.orbit)
        arrays = tuple(
            np.array([lvl.trans[p] for p in lvl.orbit], dtype=np.int32).reshape(len(lvl.orbit), degree)
            for lvl in levels
        )
        return cls(
            degree=degree,
            base=tuple(l.point for l in levels),
            orbits=tuple(tuple(l.orbit) for l in levels),
            transversals=tuple(dict(l.trans) for l in levels),
            inverses=tuple(dict(l.inv) for l in levels),
            generators=tuple(tuple(l.gens) for l in levels),
            order=order,
            _arrays=arrays,
        )

    def strong_generators(self) -> list[Permutation]:
        seen = {}
        for gens in self.generators:
            for g in gens:
                seen.setdefault(g, None)
        return [Permutation(g, check=False) for g in seen]

    def sift(self, x) -> tuple[tuple, int]:
        g = _as_images(x)
        for j, b in enumerate(self.base):
            img = g[b]
            if img == b:
                continue
            inv = self.inverses[j].get(img)
            if inv is None:
                return g, j
            g = _compose(inv, g)
        return g, len(self.base)

    def contains(self, x) -> bool:
        g = _as_images(x)
        if len(g) != self.degree:
            raise InputError(f"degree mismatch: {len(g)} vs chain degree {self.degree}")
        h, j = self.sift(g)
        return j == len(self.base) and all(i == v for i, v in enumerate(h))

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def rank(self, x) -> int:
        """Mixed-radix index of ``x`` in the transversal product order."""
        g = _as_images(x)
        idx = 0
        for j, b in enumerate(self.base):
            img = g[b]
            orbit = self.orbits[j]
            pos = orbit.index(img)
            idx = idx * len(orbit) + pos
            g = _compose(self.inverses[j][img], g)
        return idx

    def rank_array(self, rows: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`rank`; rows that are not members get rank -1."""
        g = np.array(rows, dtype=np.int64).reshape(-1, self.degree)
        idx = np.zeros(len(g), dtype=np.int64)
        ok = np.ones(len(g), dtype=bool)
        for j, b in enumerate(self.base):
            orbit = self.orbits[j]
            pos = np.full(self.degree, -1, dtype=np.int64)
            pos[list(orbit)] = np.arange(len(orbit))
            inv = np.argsort(self._arrays[j], axis=1)
            p = pos[g[:, b]]
            ok &= p >= 0
            p = np.where(p >= 0, p, 0)
            idx = idx * len(orbit) + p
            g = np.take_along_axis(inv[p], g, axis=1)
        ok &= (g == np.arange(self.degree)).all(axis=1)
        return np.where(ok, idx, -1)

    def element_array(self, cap: int = 10**6) -> np.ndarray:
        """All elements as an ``(order, degree)`` array, ordered by :meth:`rank`."""
        if self.order > cap:
            raise CapError("enumeration cap", cap, self.order, "element enumeration")
        elems = np.arange(self.degree, dtype=np.int32)[None, :]
        for arr in reversed(self._arrays):
            # u ∘ e for every transversal u and every element e below it
            elems = arr[:, elems].reshape(-1, self.degree)
        return elems

    def random_element(self, rng: np.random.Generator) -> Permutation:
        g = tuple(range(self.degree))
        for arr in self._arrays:
            u = arr[int(rng.integers(len(arr)))]
            g = _compose(g, tuple(int(v) for v in u))
        return Permutation(g, check=False)

    def random_elements(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """``count`` independent uniform elements as an ``(count, degree)`` array."""
        out = np.broadcast_to(np.arange(self.degree, dtype=np.int32), (count, self.degree)).copy()
        for arr in self._arrays:
            picks = arr[rng.integers(len(arr), size=count)]
            out = np.take_along_axis(out, picks, axis=1)
        return out


def build_chain(generators: Sequence, degree: int, base_prefix: Sequence[int] = ()) -> StabilizerChain:
    gens = [_as_images(g) for g in generators]
    for g in gens:
        if len(g) != degree:
            raise InputError(f"generator of degree {len(g)} in group of degree {degree}")
    levels, _ = _schreier_sims(gens, degree, base_prefix)
    return StabilizerChain._from_levels(degree, levels)


def generated_order_at_least(generators: Sequence, degree: int, target: int) -> bool:
    """True iff the group generated by ``generators`` has order >= ``target``."""
    gens = [_as_images(g) for g in generators]
    levels, complete = _schreier_sims(gens, degree, (), target_order=target)
    order = 1
    for lvl in levels:
        order *= len(lvl.orbit)
    return order >= target


# ---------------------------------------------------------------------------
# Groups


@dataclass(frozen=True, eq=False)
class PermGroup:
    degree: int
    generators: tuple[Permutation, ...]
    name: str | None = None

    def __post_init__(self):
        if self.degree < 1:
            raise InputError("degree must be positive")
        gens = tuple(g if isinstance(g, Permutation) else Permutation(g) for g in self.generators)
        for g in gens:
            if g.degree != self.degree:
                raise InputError(f"generator {g} has degree {g.degree}, expected {self.degree}")
        object.__setattr__(self, "generators", gens)

    @classmethod
    def from_cycles(cls, degree: int, *cycle_strings: str, name: str | None = None) -> PermGroup:
        return cls(degree, tuple(Permutation.from_cycles(s, degree) for s in cycle_strings), name)

    @cached_property
    def chain(self) -> StabilizerChain:
        return build_chain(self.generators, self.degree)

    def order(self) -> int:
        return self.chain.order

    def identity(self) -> Permutation:
        return Permutation.identity(self.degree)

    def __contains__(self, x) -> bool:
        return self.chain.contains(x)

    def contains(self, x) -> bool:
        return self.chain.contains(x)

    def is_trivial(self) -> bool:
        return all(g.is_identity() for g in self.generators)

    def elements(self, cap: int = 10**6) -> list[Permutation]:
        return [Permutation(row.tolist(), check=False) for row in self.chain.element_array(cap)]

    def orbit(self, p: int) -> set[int]:
        return orbit(self, p)

    def orbits(self) -> list[list[int]]:
        return orbits(self)

    def subgroup(self, gens: Sequence, name: str | None = None) -> PermGroup:
        return PermGroup(self.degree, tuple(gens), name)

    def is_subgroup_of(self, other: PermGroup) -> bool:
        return all(other.contains(g) for g in self.generators)

    def content_hash(self) -> str:
        import hashlib
        payload = json.dumps(group_to_json(self, with_name=False), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()

    def __repr__(self) -> str:
        label = self.name or "PermGroup"
        return f"<{label} degree={self.degree} gens={len(self.generators)}>"


def orbit(g: PermGroup, p: int) -> set[int]:
    if not 0 <= p < g.degree:
        raise InputError(f"point {p} out of range for degree {g.degree}")
    seen = {p}
    frontier = [p]
    imgs = [s.images for s in g.generators]
    while frontier:
        nxt = []
        for q in frontier:
            for s in imgs:
                r = s[q]
                if r not in seen:
                    seen.add(r)
                    nxt.append(r)
        frontier = nxt
    return seen


def orbits(g: PermGroup) -> list[list[int]]:
    """Orbits as sorted lists, ordered by their smallest point."""
    done: set[int] = set()
    out = []
    for p in range(g.degree):
        if p not in done:
            o = orbit(g, p)
            done |= o
            out.append(sorted(o))
    return out


def is_transitive(g: PermGroup) -> bool:
    return len(orbit(g, 0)) == g.degree


def point_stabilizer(g: PermGroup, p: int) -> PermGroup:
    if not 0 <= p < g.degree:
        raise InputError(f"point {p} out of range for degree {g.degree}")
    ch = build_chain(g.generators, g.degree, base_prefix=(p,))
    gens = ch.generators[1] if len(ch.base) > 1 else ()
    return PermGroup(g.degree, tuple(Permutation(x, check=False) for x in gens),
                     name=f"Stab({p})")


def restrict(g: PermGroup, points: Sequence[int], name: str | None = None) -> PermGroup:
    """Action on an invariant point set, relabelled ``points[i] -> i``."""
    pts = list(points)
    pos = {p: i for i, p in enumerate(pts)}
    if len(pos) != len(pts):
        raise InputError("repeated point in restriction")
    gens = []
    for s in g.generators:
        try:
            gens.append(Permutation([pos[s(p)] for p in pts], check=False))
        except KeyError:
            raise InputError("point set is not invariant under the group") from None
    return PermGroup(len(pts), tuple(gens), name)


def commutator(a: Permutation, b: Permutation) -> Permutation:
    return a.inverse() * b.inverse() * a * b


def normal_closure(gens: Sequence[Permutation], g: PermGroup) -> PermGroup:
    """Smallest normal subgroup of ``g`` containing ``gens``."""
    current = [x for x in gens if not x.is_identity()]
    conj = [(s, s.inverse()) for s in g.generators]
    while True:
        ch = build_chain(current, g.degree)
        added = []
        for n in current:
            for s, si in conj:
                c = s * n * si
                if not ch.contains(c) and c not in added:
                    added.append(c)
        if not added:
            return PermGroup(g.degree, tuple(current))
        current.extend(added)


def derived_subgroup(g: PermGroup) -> PermGroup:
    gens = g.generators
    comms = [commutator(a, b) for i, a in enumerate(gens) for b in gens[i + 1:]]
    return normal_closure(comms, g)


def is_perfect(g: PermGroup) -> tuple[bool, PermGroup]:
    """Whether ``g`` equals its derived subgroup; the derived subgroup is returned as witness."""
    d = derived_subgroup(g)
    return d.order() == g.order(), d


def generates(elements: Sequence, degree: int, order: int) -> bool:
    """Whether ``elements`` generate a group of the given order (e.g. the ambient group)."""
    return generated_order_at_least(elements, degree, order)


# ---------------------------------------------------------------------------
# Invariant partitions


def invariant_partitions(g: PermGroup, domain: Iterable[int] | None = None,
                         cap: int = DEFAULT_PARTITION_CAP) -> list[tuple[tuple[int, ...], ...]]:
    """All set partitions of ``domain`` whose blocks are permuted by every generator."""
    pts = sorted(set(range(g.degree) if domain is None else domain))
    if len(pts) > cap:
        raise CapError("partition cap", cap, len(pts), "invariant_partitions")
    pos = {p: i for i, p in enumerate(pts)}
    n = len(pts)
    maps = []
    for s in g.generators:
        try:
            m = [pos[s(p)] for p in pts]
        except KeyError:
            raise InputError("domain is not invariant under the group") from None
        inv = [0] * n
        for i, x in enumerate(m):
            inv[x] = i
        maps.append((m, inv))
    block = [-1] * n
    results = []

    def consistent(x: int) -> bool:
        for m, inv in maps:
            for p in (x, inv[x]):
                if block[p] < 0 or block[m[p]] < 0:
                    continue
                for q in range(x + 1):
                    if block[q] < 0 or block[m[q]] < 0:
                        continue
                    if (block[p] == block[q]) != (block[m[p]] == block[m[q]]):
                        return False
        return True

    def rec(x: int, nblocks: int):
        if x == n:
            blocks: list[list[int]] = [[] for _ in range(nblocks)]
            for i, b in enumerate(block):
                blocks[b].append(pts[i])
            results.append(tuple(tuple(b) for b in blocks))
            return
        for b in range(nblocks + 1):
            block[x] = b
            if consistent(x):
                rec(x + 1, max(nblocks, b + 1))
        block[x] = -1

    rec(0, 0)
    return results


def _minimal_block_system(g: PermGroup, pts: Sequence[int], seed: Iterable[int]) -> tuple[tuple[int, ...], ...]:
    """Finest invariant partition of the orbit ``pts`` that puts all of ``seed`` in one block."""
    parent = {p: p for p in pts}

    def find(p):
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    seed = list(seed)
    queue = [(seed[0], q) for q in seed[1:]]
    while queue:
        a, b = queue.pop()
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        parent[rb] = ra
        queue.extend((s(ra), s(rb)) for s in g.generators)
    classes: dict[int, list[int]] = {}
    for p in pts:
        classes.setdefault(find(p), []).append(p)
    return tuple(sorted(tuple(c) for c in classes.values()))


def block_systems(g: PermGroup, orbit_points: Iterable[int]) -> list[tuple[tuple[int, ...], ...]]:
    """All invariant partitions of a single orbit, trivial ones included.

    The blocks through a fixed point form a lattice in which each block is
    the join of the minimal blocks it contains, so a breadth-first search
    over joins finds every system.
    """
    pts = sorted(set(orbit_points))
    if not pts or orbit(g, pts[0]) != set(pts):
        raise InputError("points do not form a single orbit")
    first = pts[0]
    start = _minimal_block_system(g, pts, [first])
    found = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for system in frontier:
            block = next(b for b in system if first in b)
            for q in pts:
                if q in block:
                    continue
                joined = _minimal_block_system(g, pts, list(block) + [q])
                if joined not in found:
                    found.add(joined)
                    nxt.append(joined)
        frontier = nxt
    return sorted(found, key=lambda s: (-len(s), s))


# ---------------------------------------------------------------------------
# I/O


def group_to_json(g: PermGroup, with_name: bool = True) -> dict:
    out = {"degree": g.degree, "generators": [list(s.images) for s in g.generators]}
    if with_name and g.name:
        out["name"] = g.name
    return out


def group_from_json(data: dict | str) -> PermGroup:
    if isinstance(data, str):
        data = json.loads(data)
    try:
        degree = int(data["degree"])
        raw = data["generators"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed group description: {exc}") from None
    gens = []
    for r in raw:
        if isinstance(r, str):
            gens.append(Permutation.from_cycles(r, degree))
        else:
            gens.append(Permutation(r))
    return PermGroup(degree, tuple(gens), data.get("name"))
