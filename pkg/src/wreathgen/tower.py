"""Iterated wreath products ``L_{n+1} = L_n ⋉ L^{D^n}`` acting on words over ``D``.

A word ``(a_1, ..., a_n)`` is encoded as ``Σ a_m |D|^{n-m}``, first letter most
significant. A :class:`WreathElement` of level ``n`` is a pair ``(x, f)`` with
``x`` in ``L_{n-1}`` and ``f`` a map from words of length ``n-1`` to ``L``.
It acts by ``(x, f)(v, j) = (x(v), f(v)(j))`` and multiplies by
``(x1, f1)(x2, f2) = (x1 x2, w -> f1(x2 w) f2(w))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from . import permcore
from .errors import CapError, InputError, InvariantError
from .finite import Hom, TableGroup, as_table, extend_to_hom
from .permcore import Permutation, PermGroup

DEFAULT_DEGREE_CAP = 10_000


@dataclass(frozen=True, eq=False)
class TowerSpec:
    """Base group ``L`` on ``D = {0..d-1}`` together with its orbit partition."""

    base: PermGroup
    orbits: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        actual = tuple(tuple(o) for o in permcore.orbits(self.base))
        if not self.orbits:
            object.__setattr__(self, "orbits", actual)
        elif sorted(map(sorted, self.orbits)) != sorted(map(sorted, actual)):
            raise InputError("orbit partition does not match the orbits of L")

    @property
    def d(self) -> int:
        return self.base.degree

    @property
    def ell(self) -> int:
        return len(self.orbits)

    @cached_property
    def order(self) -> int:
        return self.base.order()

    def level_order(self, n: int) -> int:
        """``|L_n| = |L|^{1 + d + ... + d^{n-1}}``."""
        return self.order ** sum(self.d**m for m in range(n))


# ---------------------------------------------------------------------------
# words


def encode(word: Sequence[int], d: int) -> int:
    idx = 0
    for a in word:
        if not 0 <= a < d:
            raise InputError(f"letter {a} outside the alphabet of size {d}")
        idx = idx * d + a
    return idx


def decode(index: int, d: int, n: int) -> tuple[int, ...]:
    if not 0 <= index < d**n:
        raise InputError(f"word index {index} out of range for length {n}")
    out = []
    for _ in range(n):
        index, a = divmod(index, d)
        out.append(a)
    return tuple(reversed(out))


# ---------------------------------------------------------------------------
# the levels as permutation groups


def level_generators(spec: TowerSpec, n: int) -> list[Permutation]:
    """Each generator of ``L`` acting on letter ``m+1`` of words with a fixed prefix ``v`` of length ``m``."""
    d = spec.d
    size = d**n
    idx = np.arange(size)
    gens = []
    for m in range(n):
        block = d ** (n - m)  # words sharing a prefix of length m
        unit = d ** (n - m - 1)
        letter = (idx // unit) % d
        for s in spec.base.generators:
            img_letter = np.asarray(s.images)[letter]
            moved = idx + (img_letter - letter) * unit
            for v in range(d**m):
                images = idx.copy()
                sl = slice(v * block, (v + 1) * block)
                images[sl] = moved[sl]
                gens.append(Permutation(images.tolist(), check=False))
    return gens


def build_level(spec: TowerSpec, n: int, cap: int = DEFAULT_DEGREE_CAP,
                verify: bool = True) -> PermGroup:
    """``L_n`` as a permutation group on the ``d^n`` words of length ``n``."""
    if n < 0:
        raise InputError("level must be non-negative")
    if spec.d**n > cap:
        raise CapError("degree cap", cap, spec.d**n, f"level {n}")
    if n == 0:
        return PermGroup(1, (), name="L0")
    if n == 1:
        return PermGroup(spec.d, spec.base.generators, name="L1")
    g = PermGroup(spec.d**n, tuple(level_generators(spec, n)), name=f"L{n}")
    if verify and g.order() != spec.level_order(n):
        raise InvariantError(f"level {n} has order {g.order()}, expected {spec.level_order(n)}")
    return g


@dataclass(frozen=True)
class OrbitSignature:
    word: tuple[int, ...]
    size: int


def orbit_signatures(spec: TowerSpec, n: int) -> list[OrbitSignature]:
    """The ``ℓ^n`` products ``D_{i_1} x ... x D_{i_n}`` (orbits of ``L_n``)."""
    sizes = [len(o) for o in spec.orbits]
    out = []
    for w in np.ndindex(*([spec.ell] * n)):
        size = 1
        for i in w:
            size *= sizes[i]
        out.append(OrbitSignature(tuple(int(i) for i in w), size))
    return out


def signature_points(spec: TowerSpec, sig: OrbitSignature) -> set[int]:
    """The words belonging to the orbit ``D_{i_1} x ... x D_{i_n}``."""
    pts = {0}
    for i in sig.word:
        pts = {p * spec.d + a for p in pts for a in spec.orbits[i]}
    return pts


# ---------------------------------------------------------------------------
# structured elements


@dataclass(frozen=True)
class WreathElement:
    """``(top, leaves)`` at ``level``; the top of a level-1 element is ``None``."""

    level: int
    top: WreathElement | None
    leaves: tuple[Permutation, ...]

    @cached_property
    def array(self) -> np.ndarray:
        """Image array of the action on words of length ``level``."""
        d = self.leaves[0].degree
        top = np.zeros(1, dtype=np.int64) if self.top is None else self.top.array
        leaf = np.array([p.images for p in self.leaves], dtype=np.int64)
        return (top[:, None] * d + leaf).ravel()

    def to_permutation(self) -> Permutation:
        return Permutation(self.array.tolist(), check=False)

    def __mul__(self, other: WreathElement) -> WreathElement:
        return mult(self, other)


def identity(spec: TowerSpec, n: int) -> WreathElement:
    if n < 1:
        raise InputError("structured elements start at level 1")
    e = Permutation.identity(spec.d)
    top = None if n == 1 else identity(spec, n - 1)
    return WreathElement(n, top, (e,) * spec.d ** (n - 1))


def make(spec: TowerSpec, top: WreathElement | None, leaves: Sequence[Permutation]) -> WreathElement:
    n = 1 if top is None else top.level + 1
    leaves = tuple(leaves)
    if len(leaves) != spec.d ** (n - 1):
        raise InputError(f"level {n} needs {spec.d ** (n - 1)} leaves, got {len(leaves)}")
    for p in leaves:
        if p.degree != spec.d or not spec.base.contains(p):
            raise InputError(f"leaf {p} is not an element of L")
    return WreathElement(n, top, leaves)


def mult(a: WreathElement, b: WreathElement) -> WreathElement:
    if a.level != b.level:
        raise InputError(f"level mismatch: {a.level} vs {b.level}")
    if a.level == 1:
        return WreathElement(1, None, (a.leaves[0] * b.leaves[0],))
    x2 = b.top.array
    leaves = tuple(a.leaves[int(x2[w])] * b.leaves[w] for w in range(len(b.leaves)))
    return WreathElement(a.level, mult(a.top, b.top), leaves)


def inverse(a: WreathElement) -> WreathElement:
    if a.level == 1:
        return WreathElement(1, None, (a.leaves[0].inverse(),))
    top = inverse(a.top)
    xinv = top.array
    leaves = tuple(a.leaves[int(xinv[w])].inverse() for w in range(len(a.leaves)))
    return WreathElement(a.level, top, leaves)


def act(e: WreathElement, v: Sequence[int] | int, j: int) -> tuple[tuple[int, ...], int]:
    """``(x, f)(v, j) = (x(v), f(v)(j))`` with ``v`` a word of length ``level - 1``."""
    d = e.leaves[0].degree
    n = e.level - 1
    if isinstance(v, (int, np.integer)):
        vi = int(v)
        if not 0 <= vi < d**n:
            raise InputError(f"word index {vi} out of range")
    else:
        if len(v) != n:
            raise InputError(f"word of length {len(v)}, expected {n}")
        vi = encode(v, d)
    if not 0 <= j < d:
        raise InputError(f"letter {j} outside the alphabet")
    xv = 0 if e.top is None else int(e.top.array[vi])
    return decode(xv, d, n), e.leaves[vi](j)


def from_permutation(spec: TowerSpec, n: int, p: Permutation | Sequence[int]) -> WreathElement:
    """Read ``(x, f)`` back from a permutation of the words; it must lie in ``L_n``."""
    arr = np.asarray(p.images if isinstance(p, Permutation) else p, dtype=np.int64)
    d = spec.d
    if arr.size != d**n:
        raise InputError(f"permutation of degree {arr.size} is not on words of length {n}")
    rows = arr.reshape(-1, d)
    tops = rows // d
    if not (tops == tops[:, :1]).all():
        raise InputError("permutation does not preserve the prefix structure")
    leaves = tuple(Permutation((rows % d)[w].tolist()) for w in range(rows.shape[0]))
    top = None if n == 1 else from_permutation(spec, n - 1, tops[:, 0])
    return make(spec, top, leaves)


def random_element(spec: TowerSpec, n: int, rng: np.random.Generator) -> WreathElement:
    chain = spec.base.chain
    top = None if n == 1 else random_element(spec, n - 1, rng)
    arr = chain.random_elements(spec.d ** (n - 1), rng)
    leaves = tuple(Permutation(row.tolist(), check=False) for row in arr)
    return WreathElement(n, top, leaves)


# ---------------------------------------------------------------------------
# quotient maps showing necessity of the two conditions


def abelianization(g: PermGroup) -> Hom | None:
    """The natural map ``L -> L/[L, L]``, or ``None`` if ``L`` is perfect."""
    perfect, derived = permcore.is_perfect(g)
    if perfect:
        return None
    T = as_table(g)
    chain = g.chain
    mask = 0
    for row in derived.chain.element_array():
        mask |= 1 << chain.rank(tuple(int(v) for v in row))
    Q, label = T.quotient(mask)
    return Hom(T, Q, label)


@dataclass
class AbelianizationWitness:
    """``(x, f) -> Π_v π(f(v))`` on level ``n+1``, landing in the abelian group ``A``."""

    spec: TowerSpec
    n: int
    pi: Hom

    def leaf_value(self, p: Permutation) -> int:
        return int(self.pi.images[self.spec.base.chain.rank(p)])

    def __call__(self, e: WreathElement) -> int:
        if e.level != self.n + 1:
            raise InputError(f"expected a level {self.n + 1} element")
        A = self.pi.target
        acc = 0
        for p in e.leaves:
            acc = int(A.table[acc, self.leaf_value(p)])
        return acc

    def verify(self, rng: np.random.Generator, pairs: int = 1000) -> bool:
        A = self.pi.target
        e = identity(self.spec, self.n + 1)
        if self(e) != 0:
            return False
        for _ in range(pairs):
            a = random_element(self.spec, self.n + 1, rng)
            b = random_element(self.spec, self.n + 1, rng)
            if self(mult(a, b)) != A.table[self(a), self(b)]:
                return False
        return self.is_surjective()

    def is_surjective(self) -> bool:
        A = self.pi.target
        level = build_level(self.spec, self.n + 1, verify=False)
        images = {self(from_permutation(self.spec, self.n + 1, s)) for s in level.generators}
        return A.closure_size(sorted(images)) == A.n


def abelianization_witness(spec: TowerSpec, n: int, pi: Hom | None = None) -> AbelianizationWitness | None:
    """Quotient of ``L_{n+1}`` onto an abelian group; ``None`` when ``L`` is perfect.

    ``pi`` must be a homomorphism from the table of ``L`` (indexed by chain
    rank) onto an abelian group; by default the abelianization is used.
    """
    if pi is None:
        pi = abelianization(spec.base)
        if pi is None:
            return None
    T = as_table(spec.base)
    if pi.source.n != T.n:
        raise InputError("π is not defined on L")
    if not pi.target.is_abelian():
        raise InputError("target of π is not abelian")
    check = extend_to_hom(T, pi.target, [int(pi.images[s]) for s in T.generators])
    if check is None or not np.array_equal(check.images, pi.images):
        raise InputError("π is not a homomorphism")
    if not pi.is_surjective():
        raise InputError("π is not surjective")
    return AbelianizationWitness(spec, n, pi)


def sign_hom(g: PermGroup) -> Hom:
    """Sign character of a permutation group onto ``C_2`` (trivial image allowed)."""
    T = as_table(g)
    C2 = TableGroup(np.array([[0, 1], [1, 0]]), [1], name="C2")
    chain = g.chain
    signs = np.zeros(T.n, dtype=np.int64)
    for i, row in enumerate(chain.element_array()):
        p = Permutation(row.tolist(), check=False)
        signs[i] = sum(len(c) - 1 for c in p.cycles()) % 2
    return Hom(T, C2, signs)


@dataclass
class FixedPointWitness:
    """``(x, f) -> (x, f(j...j))`` from ``L_{n+1}`` onto ``L_n x L``."""

    spec: TowerSpec
    n: int
    point: int

    @property
    def word(self) -> int:
        return encode([self.point] * self.n, self.spec.d)

    def __call__(self, e: WreathElement) -> tuple[WreathElement | None, Permutation]:
        if e.level != self.n + 1:
            raise InputError(f"expected a level {self.n + 1} element")
        return e.top, e.leaves[self.word]

    def _same(self, u, v) -> bool:
        (t1, l1), (t2, l2) = u, v
        if l1 != l2:
            return False
        return t1 is None or np.array_equal(t1.array, t2.array)

    def verify(self, rng: np.random.Generator, pairs: int = 1000) -> bool:
        e = identity(self.spec, self.n + 1)
        top, leaf = self(e)
        if not leaf.is_identity() or (top is not None and not top.to_permutation().is_identity()):
            return False
        for _ in range(pairs):
            a = random_element(self.spec, self.n + 1, rng)
            b = random_element(self.spec, self.n + 1, rng)
            (ta, la), (tb, lb) = self(a), self(b)
            prod = (None if ta is None else mult(ta, tb), la * lb)
            if not self._same(self(mult(a, b)), prod):
                return False
        return self.is_surjective()

    def is_surjective(self) -> bool:
        """The images of the generators of ``L_{n+1}`` generate ``L_n x L``."""
        d = self.spec.d
        dn = d**self.n
        level = build_level(self.spec, self.n + 1, verify=False)
        gens = []
        for s in level.generators:
            top, leaf = self(from_permutation(self.spec, self.n + 1, s))
            top_arr = [0] if top is None else top.array.tolist()
            gens.append(Permutation(top_arr + [dn + leaf(i) for i in range(d)]))
        image = PermGroup(dn + d, tuple(gens))
        return image.order() == self.spec.level_order(self.n) * self.spec.order


def fixed_points(spec: TowerSpec) -> list[int]:
    return [o[0] for o in spec.orbits if len(o) == 1]


def fixed_point_witness(spec: TowerSpec, n: int, point: int | None = None) -> FixedPointWitness | None:
    """Quotient map for an ``L``-fixed point; ``None`` when ``L`` has no fixed point."""
    if point is None:
        fixed = fixed_points(spec)
        if not fixed:
            return None
        point = fixed[0]
    if not 0 <= point < spec.d:
        raise InputError(f"point {point} out of range")
    if any(s(point) != point for s in spec.base.generators):
        raise InputError(f"point {point} is not fixed by L")
    return FixedPointWitness(spec, n, point)
