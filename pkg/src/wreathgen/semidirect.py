"""Groups ``Y = X ⋉ (B_1^{Ω_1} x ... x B_t^{Ω_t})`` and their maximal subgroups.

``Y`` is realised as a permutation group on ``dom(X) ⊔ ⨆_i Ω_i x dom(B_i)``
where ``(x, f)`` sends ``(ω, b)`` to ``(x ω, f(ω) b)``, the same convention
as the tower. Subgroups are :class:`PermGroup` values; whenever ``|Y|`` is
below the enumeration cap they can also be turned into boolean masks over
the elements of ``Y`` (in chain rank order), which is what normalizers,
maximality tests and conjugacy classing use.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import lattice, permcore
from .errors import CapError, InputError, InvariantError
from .finite import Hom, TableGroup, as_table, mask_from_bool, popcount
from .permcore import Permutation, PermGroup

DEFAULT_ENUM_CAP = 10**5
DEFAULT_INDEX_CAP = 10**4


def _perm_of(T: TableGroup, i: int) -> Permutation:
    return Permutation(T.perms[i].tolist(), check=False)


def table_subgroup(g: PermGroup, mask: int, name: str | None = None) -> PermGroup:
    """Permutation subgroup of ``g`` from a mask over its table."""
    T = as_table(g)
    gens = tuple(_perm_of(T, a) for a in T.subgroup_generators(mask))
    return PermGroup(g.degree, gens, name)


def subgroup_mask(g: PermGroup, h: PermGroup) -> int:
    """Mask over the table of ``g`` of a subgroup ``h``."""
    ranks = g.chain.rank_array(h.chain.element_array())
    if (ranks < 0).any():
        raise InputError("not a subgroup of the ambient group")
    arr = np.zeros(as_table(g).n, dtype=bool)
    arr[ranks] = True
    return mask_from_bool(arr)


@dataclass(frozen=True, eq=False)
class SemidirectSpec:
    """``X`` with transitive invariant point sets ``Ω_i`` and groups ``B_i``."""

    X: PermGroup
    omegas: tuple[tuple[int, ...], ...]
    B: tuple[PermGroup, ...]
    check_standing: bool = True

    def __post_init__(self):
        omegas = tuple(tuple(sorted(o)) for o in self.omegas)
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "B", tuple(self.B))
        if not omegas or len(omegas) != len(self.B):
            raise InputError("need t >= 1 and one group per X-set")
        seen: set[int] = set()
        for om in omegas:
            if not om:
                raise InputError("empty X-set")
            if seen & set(om):
                raise InputError("X-sets must be disjoint")
            seen |= set(om)
            if max(om) >= self.X.degree:
                raise InputError("X-set point outside the domain of X")
            if permcore.orbit(self.X, om[0]) != set(om):
                raise InputError(f"X does not act transitively on {om}")
        if self.check_standing:
            for b in self.B:
                if b.order() == 1:
                    raise InputError("the groups B_i must be non-trivial")
                if not permcore.is_perfect(b)[0]:
                    raise InputError(f"{b.name or 'B_i'} is not perfect")

    @property
    def t(self) -> int:
        return len(self.B)


@dataclass(frozen=True)
class StructuredElement:
    """``(x, f_1, ..., f_t)`` with ``f_i`` listed along the sorted points of ``Ω_i``."""

    x: Permutation
    fs: tuple[tuple[Permutation, ...], ...]


class SemidirectGroup:
    def __init__(self, spec: SemidirectSpec, enum_cap: int = DEFAULT_ENUM_CAP):
        self.spec = spec
        self.enum_cap = enum_cap
        X = spec.X
        self.dx = X.degree
        self.offsets = []
        off = self.dx
        for om, b in zip(spec.omegas, spec.B):
            self.offsets.append(off)
            off += len(om) * b.degree
        self.degree = off
        self.pos = [{w: q for q, w in enumerate(om)} for om in spec.omegas]
        gens = [self.lift(x) for x in X.generators]
        for i, (om, b) in enumerate(zip(spec.omegas, spec.B)):
            for q in range(len(om)):
                gens.extend(self.leaf(i, q, s) for s in b.generators)
        self.group = PermGroup(self.degree, tuple(gens), name="Y")
        expected = X.order() * math.prod(b.order() ** len(om) for om, b in zip(spec.omegas, spec.B))
        if self.group.order() != expected:
            raise InvariantError(f"|Y| = {self.group.order()}, expected {expected}")

    # -- structured <-> permutation -------------------------------------

    @property
    def order(self) -> int:
        return self.group.order()

    def lift(self, x: Permutation) -> Permutation:
        """``(x, e)``."""
        images = list(x.images) + [0] * (self.degree - self.dx)
        for i, om in enumerate(self.spec.omegas):
            d = self.spec.B[i].degree
            for q, w in enumerate(om):
                q2 = self.pos[i][x(w)]
                for b in range(d):
                    images[self.offsets[i] + q * d + b] = self.offsets[i] + q2 * d + b
        return Permutation(images, check=False)

    def leaf(self, i: int, q: int, b: Permutation) -> Permutation:
        """Base element whose only non-trivial component is ``b`` at position ``q`` of ``Ω_i``."""
        images = list(range(self.degree))
        d = self.spec.B[i].degree
        start = self.offsets[i] + q * d
        for p in range(d):
            images[start + p] = start + b(p)
        return Permutation(images, check=False)

    def element(self, x: Permutation, fs: Sequence[Sequence[Permutation]]) -> Permutation:
        p = self.lift(x)
        for i, f in enumerate(fs):
            for q, b in enumerate(f):
                if not b.is_identity():
                    p = p * self.leaf(i, q, b)
        return p

    def structured(self, p: Permutation) -> StructuredElement:
        img = p.images
        x = Permutation(img[: self.dx])
        fs = []
        for i, om in enumerate(self.spec.omegas):
            d = self.spec.B[i].degree
            comps = []
            for q in range(len(om)):
                start = self.offsets[i] + q * d
                target = img[start] - (img[start] - self.offsets[i]) % d
                comps.append(Permutation([img[start + b] - target for b in range(d)]))
            fs.append(tuple(comps))
        return StructuredElement(x, tuple(fs))

    def to_permutation(self, e: StructuredElement) -> Permutation:
        return self.element(e.x, e.fs)

    def mult(self, a: StructuredElement, b: StructuredElement) -> StructuredElement:
        """``(x1, f1)(x2, f2) = (x1 x2, w -> f1(x2 w) f2(w))``."""
        fs = []
        for i, om in enumerate(self.spec.omegas):
            fs.append(tuple(a.fs[i][self.pos[i][b.x(w)]] * b.fs[i][q] for q, w in enumerate(om)))
        return StructuredElement(a.x * b.x, tuple(fs))

    def pi(self, p: Permutation) -> Permutation:
        return Permutation(p.images[: self.dx], check=False)

    def projection(self, h: PermGroup) -> PermGroup:
        return PermGroup(self.dx, tuple(self.pi(s) for s in h.generators))

    def surjects(self, h: PermGroup) -> bool:
        return self.projection(h).order() == self.spec.X.order()

    def base_group(self) -> PermGroup:
        return self.standard(self.spec.B)

    def part(self, i: int) -> PermGroup:
        """``B_i^{Ω_i}``."""
        gens = [self.leaf(i, q, s) for q in range(len(self.spec.omegas[i]))
                for s in self.spec.B[i].generators]
        return PermGroup(self.degree, tuple(gens))

    def standard(self, ns: Sequence[PermGroup]) -> PermGroup:
        """``∏ N_i^{Ω_i}``."""
        gens = [self.leaf(i, q, s) for i, n in enumerate(ns)
                for q in range(len(self.spec.omegas[i])) for s in n.generators]
        return PermGroup(self.degree, tuple(gens))

    # -- element-level machinery ------------------------------------------

    def _need_enum(self, what: str):
        if self.order > self.enum_cap:
            raise CapError("enumeration cap", self.enum_cap, self.order, what)

    @property
    def enumerable(self) -> bool:
        return self.order <= self.enum_cap

    @cached_property
    def elements(self) -> np.ndarray:
        self._need_enum("element enumeration")
        return self.group.chain.element_array(self.enum_cap).astype(np.int64)

    @cached_property
    def _inverses(self) -> np.ndarray:
        return np.argsort(self.elements, axis=1)

    def ranks(self, rows: np.ndarray) -> np.ndarray:
        return self.group.chain.rank_array(rows)

    def mask(self, h: PermGroup) -> np.ndarray:
        self._need_enum("subgroup mask")
        out = np.zeros(len(self.elements), dtype=bool)
        r = self.ranks(h.chain.element_array(self.enum_cap))
        if (r < 0).any():
            raise InputError("not a subgroup of Y")
        out[r] = True
        return out

    def from_mask(self, mask: np.ndarray) -> PermGroup:
        gens: list[Permutation] = []
        have = np.zeros_like(mask)
        have[0] = True
        while True:
            missing = np.flatnonzero(mask & ~have)
            if missing.size == 0:
                return PermGroup(self.degree, tuple(gens))
            gens.append(Permutation(self.elements[missing[0]].tolist(), check=False))
            have = self.mask(PermGroup(self.degree, tuple(gens)))
            if (have & ~mask).any():
                raise InputError("mask is not a subgroup")

    def conjugate_mask(self, mask: np.ndarray, y: np.ndarray) -> np.ndarray:
        rows = self.elements[mask]
        yinv = np.argsort(y)
        conj = y[rows[:, yinv]]
        out = np.zeros_like(mask)
        out[self.ranks(conj)] = True
        return out

    def normalizer(self, h: PermGroup) -> PermGroup:
        """``N_Y(h)`` by testing every element of ``Y``."""
        hm = self.mask(h)
        keep = np.ones(len(self.elements), dtype=bool)
        E, Einv = self.elements, self._inverses
        for s in h.generators:
            s_arr = np.asarray(s.images, dtype=np.int64)
            conj = np.take_along_axis(E, s_arr[Einv], axis=1)
            r = self.ranks(conj)
            keep &= hm[r]
        return self.from_mask(keep)

    def is_maximal(self, m: PermGroup, index_cap: int = DEFAULT_INDEX_CAP) -> bool:
        """Proper and ``<M, y> = Y`` for one ``y`` per double coset ``MyM``."""
        order = self.order
        if m.order() >= order:
            return False
        if order // m.order() > index_cap:
            raise CapError("index cap", index_cap, order // m.order(), "maximality test")
        mm = self.mask(m)
        mrows = self.elements[mm]
        gens = [np.asarray(s.images, dtype=np.int64) for s in m.generators]
        covered = mm.copy()
        while not covered.all():
            k = int(np.flatnonzero(~covered)[0])
            y = self.elements[k]
            if not permcore.generated_order_at_least(list(m.generators) + [tuple(y.tolist())],
                                                     self.degree, order):
                return False
            # mark the double coset M y M: close y M under left multiplication by M's generators
            coset = np.zeros_like(covered)
            coset[self.ranks(y[mrows])] = True
            frontier = coset.copy()
            while frontier.any():
                rows = self.elements[frontier]
                new = np.zeros_like(coset)
                for s in gens:
                    new[self.ranks(s[rows])] = True
                frontier = new & ~coset
                coset |= new
            covered |= coset
        return True

    def core(self, m: PermGroup) -> PermGroup:
        """``M^0``, the intersection of all conjugates of ``M``."""
        mm = self.mask(m)
        if len(mm) // int(mm.sum()) > DEFAULT_INDEX_CAP:
            raise CapError("index cap", DEFAULT_INDEX_CAP, len(mm) // int(mm.sum()), "core")
        out = mm.copy()
        seen = {mm.tobytes()}
        stack = [mm]
        gens = [np.asarray(s.images, dtype=np.int64) for s in self.group.generators]
        while stack:
            cur = stack.pop()
            for y in gens:
                c = self.conjugate_mask(cur, y)
                key = c.tobytes()
                if key not in seen:
                    seen.add(key)
                    stack.append(c)
                    out &= c
        return self.from_mask(out)

    def class_count(self, masks: Sequence[np.ndarray]) -> int:
        """Number of ``Y``-conjugacy classes among subgroups given by masks."""
        keys = {m.tobytes(): m for m in masks}
        gens = [np.asarray(s.images, dtype=np.int64) for s in self.group.generators]
        seen: set[bytes] = set()
        classes = 0
        for key, m in keys.items():
            if key in seen:
                continue
            classes += 1
            stack = [m]
            seen.add(key)
            while stack:
                cur = stack.pop()
                for y in gens:
                    c = self.conjugate_mask(cur, y)
                    k = c.tobytes()
                    if k not in seen:
                        seen.add(k)
                        stack.append(c)
        return classes


def build_semidirect(spec: SemidirectSpec, enum_cap: int = DEFAULT_ENUM_CAP) -> SemidirectGroup:
    return SemidirectGroup(spec, enum_cap)


# ---------------------------------------------------------------------------
# standard normal subgroups


@dataclass
class CoreResult:
    normals: list[PermGroup]
    group: PermGroup

    @property
    def clean(self) -> bool:
        return all(n.order() == 1 for n in self.normals)


def standard_core(Y: SemidirectGroup, m: PermGroup) -> CoreResult:
    """Largest ``∏ N_i^{Ω_i}`` inside ``M`` (``N_i`` normal in ``B_i``)."""
    normals = []
    for i, b in enumerate(Y.spec.B):
        T = as_table(b)
        best = 1
        for nm in lattice.normal_masks(b):
            n = table_subgroup(b, nm)
            inside = all(m.contains(Y.leaf(i, q, s)) for q in range(len(Y.spec.omegas[i]))
                         for s in n.generators)
            if inside:
                best = T.closure(T.indices(best | nm).tolist())
        normals.append(table_subgroup(b, best))
    return CoreResult(normals, Y.standard(normals))


def is_clean(Y: SemidirectGroup, m: PermGroup) -> bool:
    return standard_core(Y, m).clean


# ---------------------------------------------------------------------------
# constructions


def _perm_hom(hom: Hom, src: PermGroup, dst: PermGroup):
    T = as_table(dst)

    def apply(p: Permutation) -> Permutation:
        return _perm_of(T, int(hom.images[src.chain.rank(p)]))

    return apply


@dataclass
class ConstructionResult:
    kind: str
    subgroup: PermGroup
    M: PermGroup | None
    index: int | None
    proper: bool | None
    maximal: bool | None
    clean: bool | None
    surjects: bool | None
    details: dict = field(default_factory=dict)


def _assess(Y: SemidirectGroup, kind: str, sub: PermGroup, m: PermGroup | None,
            check_maximal: bool = True, **details) -> ConstructionResult:
    if m is None:
        return ConstructionResult(kind, sub, None, None, None, None, None, None, details)
    index = Y.order // m.order()
    proper = index > 1
    maximal = None
    if check_maximal and Y.enumerable and index <= DEFAULT_INDEX_CAP:
        maximal = Y.is_maximal(m) if proper else False
    return ConstructionResult(kind, sub, m, index, proper, maximal, is_clean(Y, m),
                              Y.surjects(m), details)


def construct_graph_iso(Y: SemidirectGroup, sigma: dict[int, int], phis: Sequence[Hom],
                        check_maximal: bool = True) -> ConstructionResult:
    """Normalizer of the graph of ``f -> (σ(w) -> φ_w(f(w)))``.

    ``sigma`` maps points of ``Ω_1`` to points of ``Ω_2``; ``phis[q]`` is an
    isomorphism of tables ``B_1 -> B_2`` for the ``q``-th point of ``Ω_1``.
    """
    spec = Y.spec
    if spec.t != 2:
        raise InputError("graph construction needs t = 2")
    om1, om2 = spec.omegas
    if len(om1) != len(om2):
        raise InputError("no bijection between X-sets of different sizes")
    if sorted(sigma) != list(om1) or sorted(sigma.values()) != list(om2):
        raise InputError("σ is not a bijection Ω_1 -> Ω_2")
    for x in spec.X.generators:
        for w in om1:
            if sigma[x(w)] != x(sigma[w]):
                raise InputError("σ is not X-equivariant")
    if len(phis) != len(om1):
        raise InputError("need one isomorphism per point of Ω_1")
    B1, B2 = spec.B
    T1, T2 = as_table(B1), as_table(B2)
    for phi in phis:
        if phi.source.n != T1.n or phi.target.n != T2.n or len(np.unique(phi.images)) != T2.n:
            raise InputError("φ_w must be isomorphisms B_1 -> B_2")
    gens = []
    for q, w in enumerate(om1):
        apply = _perm_hom(phis[q], B1, B2)
        q2 = Y.pos[1][sigma[w]]
        for s in B1.generators:
            gens.append(Y.leaf(0, q, s) * Y.leaf(1, q2, apply(s)))
    graph = PermGroup(Y.degree, tuple(gens), name="graph")
    m = Y.normalizer(graph) if Y.enumerable else None
    return _assess(Y, "graph_iso", graph, m, check_maximal, sigma=dict(sigma))


@dataclass(frozen=True, eq=False)
class SubdiagonalData:
    """``U = T^r`` inside ``B`` and a partition of ``r·Ω`` with automorphisms of ``T``.

    ``embeddings[k]`` lists images in ``B`` of the generators of ``T`` for
    the ``k``-th factor. ``blocks`` are tuples of ``(k, ω)`` pairs and
    ``automorphisms`` maps some ``(k, ω)`` to images of ``T``'s generators
    (identity elsewhere).
    """

    T: PermGroup
    embeddings: tuple[tuple[Permutation, ...], ...]
    blocks: tuple[tuple[tuple[int, int], ...], ...]
    automorphisms: dict = field(default_factory=dict)

    @property
    def r(self) -> int:
        return len(self.embeddings)


def copies_action(X: PermGroup, omega: Sequence[int], r: int) -> PermGroup:
    """``X`` acting on ``r·Ω``; point ``(k, ω)`` is ``k |Ω| + position(ω)``."""
    pos = {w: q for q, w in enumerate(omega)}
    n = len(omega)
    gens = []
    for s in X.generators:
        gens.append(Permutation([k * n + pos[s(w)] for k in range(r) for w in omega]))
    return PermGroup(r * n, tuple(gens))


def construct_subdiagonal(Y: SemidirectGroup, data: SubdiagonalData,
                          check_maximal: bool = True) -> ConstructionResult:
    spec = Y.spec
    if spec.t != 1:
        raise InputError("subdiagonal construction needs t = 1")
    (omega,), (B,) = spec.omegas, spec.B
    T = data.T
    TT, TB = as_table(T), as_table(B)
    if TT.is_abelian() or not lattice.is_simple(T):
        raise InputError("T must be non-abelian simple")
    r = data.r
    # the factor embeddings
    iotas = []
    for imgs in data.embeddings:
        if len(imgs) != len(T.generators):
            raise InputError("embedding needs one image per generator of T")
        _, _, h = _hom(T, B, imgs)
        if popcount(h.kernel()) != 1:
            raise InputError("embedding of T is not injective")
        iotas.append(h)
    U = PermGroup(B.degree, tuple(p for imgs in data.embeddings for p in imgs))
    if U.order() != T.order() ** r:
        raise InputError("the factor copies of T do not form a direct product T^r")
    if not TB.is_normal(subgroup_mask(B, U)):
        raise InputError("U = T^r is not normal in B")
    # the partition of r·Ω
    points = {(k, w) for k in range(r) for w in omega}
    listed = [c for blk in data.blocks for c in blk]
    if sorted(listed) != sorted(points):
        raise InputError("blocks do not partition r·Ω")
    for blk in data.blocks:
        if len(blk) < 2:
            raise InputError(f"block {blk} has size 1; every block needs |A| >= 2")
    block_set = {frozenset(b) for b in data.blocks}
    for x in spec.X.generators:
        for blk in data.blocks:
            if frozenset((k, x(w)) for k, w in blk) not in block_set:
                raise InputError("partition is not X-invariant")
    phis = {}
    for c in points:
        imgs = data.automorphisms.get(c)
        if imgs is None:
            phis[c] = np.arange(TT.n)
            continue
        _, _, h = _hom(T, T, imgs)
        if len(np.unique(h.images)) != TT.n:
            raise InputError(f"φ at {c} is not an automorphism")
        phis[c] = h.images
    pos = Y.pos[0]
    gens = []
    for blk in data.blocks:
        for s in T.generators:
            t_idx = T.chain.rank(s)
            comps: dict[int, Permutation] = {}
            for k, w in blk:
                b = _perm_of(TB, int(iotas[k].images[phis[(k, w)][t_idx]]))
                comps[w] = comps[w] * b if w in comps else b
            p = Y.group.identity()
            for w, b in comps.items():
                p = p * Y.leaf(0, pos[w], b)
            gens.append(p)
    H = PermGroup(Y.degree, tuple(gens), name="H")
    exponent = sum(len(b) - 1 for b in data.blocks)
    power = T.order() ** (r * len(omega))
    if H.order() * T.order() ** exponent != power:
        raise InvariantError("subdiagonal index differs from |T|^e")
    m = Y.normalizer(H) if Y.enumerable else None
    res = _assess(Y, "subdiagonal", H, m, check_maximal, exponent=exponent,
                  index_in_power=T.order() ** exponent)
    if res.index is not None:
        res.details["bound"] = res.index**2 >= T.order() ** (r * len(omega))
    return res


def _hom(src: PermGroup, dst: PermGroup, images: Sequence[Permutation]):
    from .finite import hom_from_perm_images

    return hom_from_perm_images(src, dst, images)


def normalizer_power(Y: SemidirectGroup, T: PermGroup) -> PermGroup:
    """``N_Y(T^Ω) = X ⋉ N_B(T)^Ω`` written down directly."""
    (B,) = Y.spec.B
    TB = as_table(B)
    nb = table_subgroup(B, TB.normalizer(subgroup_mask(B, T)))
    gens = [Y.lift(x) for x in Y.spec.X.generators]
    gens += [Y.leaf(0, q, s) for q in range(len(Y.spec.omegas[0])) for s in nb.generators]
    return PermGroup(Y.degree, tuple(gens))


def construct_normalizer_T(Y: SemidirectGroup, T: PermGroup,
                           check_maximal: bool = True) -> ConstructionResult:
    spec = Y.spec
    if spec.t != 1:
        raise InputError("this construction needs t = 1")
    (omega,), (B,) = spec.omegas, spec.B
    if not T.is_subgroup_of(B):
        raise InputError("T is not a subgroup of B")
    if T.order() in (1, B.order()):
        raise InputError("T must be a proper non-trivial subgroup of B")
    TB = as_table(B)
    normal = TB.is_normal(subgroup_mask(B, T))
    power = Y.standard([T])
    m = normalizer_power(Y, T)
    if Y.enumerable and Y.mask(m).sum() != Y.mask(Y.normalizer(power)).sum():
        raise InvariantError("normalizer formula disagrees with enumeration")
    res = _assess(Y, "normalizer_T", power, m, check_maximal and not normal, normal_in_B=normal)
    if normal:
        res.maximal = False
        res.details["reason"] = "T is normal in B, so N_Y(T^Ω) = Y"
    res.details["bound"] = res.index >= (B.order() // T.order()) ** len(omega)
    return res


# ---------------------------------------------------------------------------
# classification


@dataclass
class MaximalClassReport:
    case: str | None
    order: int
    index: int
    clean: bool
    surjects: bool
    maximal: bool | None
    evidence: str
    bound: int | None = None
    bound_holds: bool | None = None
    witnesses: dict = field(default_factory=dict)
    diagnostic: str = ""

    def to_json(self) -> dict:
        return {"case": self.case, "order": str(self.order), "index": str(self.index),
                "clean": self.clean, "surjects_onto_X": self.surjects, "maximal": self.maximal,
                "evidence": self.evidence,
                "bound": None if self.bound is None else str(self.bound),
                "bound_holds": self.bound_holds, "witnesses": _jsonable(self.witnesses),
                "diagnostic": self.diagnostic}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Permutation):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, int) and abs(obj) >= 2**53:
        return str(obj)
    return obj


def _components(Y: SemidirectGroup, rows: np.ndarray, i: int) -> np.ndarray:
    """``(len(rows), |Ω_i|, deg B_i)`` array of components ``f_i(ω)``."""
    d = Y.spec.B[i].degree
    n = len(Y.spec.omegas[i])
    start = Y.offsets[i]
    block = rows[:, start:start + n * d].reshape(len(rows), n, d) - start
    return block % d


def case_predicates(Y: SemidirectGroup, m: PermGroup) -> dict[str, bool]:
    """The four mutually exclusive shapes of a clean maximal subgroup over ``X``."""
    t = Y.spec.t
    mm = Y.mask(m)
    inter = mm & Y.mask(Y.base_group())
    trivial = int(inter.sum()) == 1
    out = {"graph_iso": False, "subdiagonal": False, "normalizer_T": False, "section": False}
    if t == 2:
        p1 = Y.mask(Y.part(0)) & mm
        p2 = Y.mask(Y.part(1)) & mm
        size1 = Y.spec.B[0].order() ** len(Y.spec.omegas[0])
        size2 = Y.spec.B[1].order() ** len(Y.spec.omegas[1])
        out["graph_iso"] = (p1.sum() == 1 and p2.sum() == 1 and size1 == size2
                            and inter.sum() == size1)
        return out
    if trivial:
        out["section"] = True
        return out
    comps = _components(Y, Y.elements[inter], 0)
    full = all(len(np.unique(comps[:, q, :], axis=0)) == Y.spec.B[0].order()
               for q in range(comps.shape[1]))
    out["subdiagonal" if full else "normalizer_T"] = True
    return out


def classify_maximal(Y: SemidirectGroup, m: PermGroup, check_maximal: bool = True) -> MaximalClassReport:
    """Tag a maximal subgroup surjecting onto ``X`` with its structural case."""
    order = m.order()
    index = Y.order // order
    surj = Y.surjects(m)
    maximal, evidence = None, "assumed"
    if check_maximal and Y.enumerable and index <= DEFAULT_INDEX_CAP:
        maximal = Y.is_maximal(m)
        evidence = "exhaustive"
    core = standard_core(Y, m)
    rep = MaximalClassReport(None, order, index, core.clean, surj, maximal, evidence)
    if maximal is False:
        rep.diagnostic = "not a maximal subgroup"
        return rep
    if not surj:
        rep.diagnostic = "does not surject onto X"
        return rep
    if not core.clean:
        quotient = _quotient_by_core(Y, m, core)
        if quotient is None:
            rep.diagnostic = "contains the whole base group"
            return rep
        Yq, mq = quotient
        inner = classify_maximal(Yq, mq, check_maximal=False)
        inner.witnesses["standard_core_orders"] = [n.order() for n in core.normals]
        inner.index, inner.order, inner.clean = index, order, False
        inner.maximal, inner.evidence = maximal, evidence
        return inner
    preds = case_predicates(Y, m)
    tags = [k for k, v in preds.items() if v]
    if len(tags) != 1:
        rep.diagnostic = f"case predicates not exclusive: {tags}"
        return rep
    rep.case = tags[0]
    handler = {"graph_iso": _witness_graph, "section": _witness_section,
               "subdiagonal": _witness_subdiagonal, "normalizer_T": _witness_normalizer}[rep.case]
    handler(Y, m, rep)
    return rep


def _witness_graph(Y, m, rep):
    om1, om2 = Y.spec.omegas
    mm = Y.mask(m) & Y.mask(Y.base_group())
    rows = Y.elements[mm]
    c1 = _components(Y, rows, 0)
    c2 = _components(Y, rows, 1)
    ident1 = np.arange(Y.spec.B[0].degree)
    ident2 = np.arange(Y.spec.B[1].degree)
    sigma, phis = {}, {}
    for q, w in enumerate(om1):
        images = []
        for s in Y.spec.B[0].generators:
            want = np.tile(ident1, (len(om1), 1))
            want[q] = s.images
            hit = np.flatnonzero((c1 == want).all(axis=(1, 2)))
            comp = c2[hit[0]]
            moved = [p for p in range(len(om2)) if not (comp[p] == ident2).all()]
            sigma[w] = om2[moved[0]]
            images.append(Permutation(comp[moved[0]].tolist()))
        phis[w] = images
    rep.witnesses.update(sigma=sigma, phi_generator_images=phis)
    rep.bound = Y.spec.B[0].order() ** len(om1)
    rep.bound_holds = rep.index >= rep.bound


def _witness_section(Y, m, rep):
    rows = Y.elements[Y.mask(m)]
    dx = Y.dx
    cocycle = {}
    X = Y.spec.X
    for x in X.generators:
        hit = np.flatnonzero((rows[:, :dx] == np.asarray(x.images)).all(axis=1))
        comps = _components(Y, rows[hit[:1]], 0)[0]
        cocycle[str(x)] = [Permutation(c.tolist()) for c in comps]
    rep.witnesses["h_x"] = cocycle
    # the cocycle identity h_{x1 x2} = h_{x1}^{x2} h_{x2} on all pairs
    table = {}
    comps = _components(Y, rows, 0)
    for row, c in zip(rows, comps):
        table[tuple(row[:dx].tolist())] = [tuple(v.tolist()) for v in c]
    pos = Y.pos[0]
    omega = Y.spec.omegas[0]
    ok = True
    for x1, h1 in table.items():
        for x2, h2 in table.items():
            x12 = tuple(x1[x2[p]] for p in range(dx))
            h12 = table.get(x12)
            for q, w in enumerate(omega):
                a = h1[pos[x2[w]]]
                expected = tuple(a[v] for v in h2[q])
                if h12 is None or h12[q] != expected:
                    ok = False
    rep.witnesses["cocycle_identity"] = ok
    rep.bound = None
    rep.bound_holds = True


def _factor_decomposition(B: PermGroup, U: PermGroup, factors: list[PermGroup]):
    """Map rank-in-B of each element of ``U = T_1 x ... x T_r`` to its components."""
    TB = as_table(B)
    chain = B.chain
    comp_lists = [f.chain.element_array() for f in factors]
    out = {}
    for combo in itertools.product(*[range(len(c)) for c in comp_lists]):
        p = np.arange(B.degree)
        for k, j in enumerate(combo):
            p = comp_lists[k][j][p]
        out[chain.rank(tuple(int(v) for v in p))] = combo
    if len(out) != U.order():
        raise InvariantError("factors do not decompose U")
    return out, TB


def _witness_subdiagonal(Y, m, rep):
    (B,), (omega,) = Y.spec.B, Y.spec.omegas
    TB = as_table(B)
    mm = Y.mask(m)
    minimal = [table_subgroup(B, n) for n in lattice.minimal_normal_masks(TB)]
    U = None
    for n in minimal:
        if (mm & Y.mask(Y.standard([n]))).sum() > 1:
            U = n
            break
    if U is None:
        U = B
    TU = as_table(U)
    factors = [table_subgroup(U, f) for f in lattice.minimal_normal_masks(TU)]
    t_order = factors[0].order()
    r = len(factors)
    if t_order**r != U.order() or as_table(factors[0]).is_abelian():
        rep.diagnostic = "U is not a power of a non-abelian simple group"
        return
    decomp, _ = _factor_decomposition(B, U, factors)
    H = mm & Y.mask(Y.standard([U]))
    rows = Y.elements[H]
    comps = _components(Y, rows, 0)
    coords = [(k, w) for k in range(r) for w in omega]
    values = np.zeros((len(rows), len(coords)), dtype=np.int64)
    for q, w in enumerate(omega):
        ranks = B.chain.rank_array(comps[:, q, :])
        for n, rk in enumerate(ranks):
            combo = decomp[int(rk)]
            for k in range(r):
                values[n, coords.index((k, w))] = combo[k]
    parent = list(range(len(coords)))

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    for a, b in itertools.combinations(range(len(coords)), 2):
        if len({(u, v) for u, v in zip(values[:, a], values[:, b])}) == t_order:
            parent[find(a)] = find(b)
    groups: dict[int, list] = {}
    for a, c in enumerate(coords):
        groups.setdefault(find(a), []).append(c)
    blocks = sorted(tuple(sorted(g)) for g in groups.values())
    exponent = sum(len(b) - 1 for b in blocks)
    invariant = all(
        frozenset((k, x(w)) for k, w in b) in {frozenset(bb) for bb in blocks}
        for x in Y.spec.X.generators for b in blocks)
    rep.witnesses.update(U_order=U.order(), T_order=t_order, r=r, blocks=blocks,
                         blocks_at_least_two=all(len(b) >= 2 for b in blocks),
                         partition_invariant=invariant,
                         index_matches=int(H.sum()) * t_order**exponent == t_order ** (r * len(omega)))
    nh = Y.normalizer(Y.from_mask(H))
    rep.witnesses["M_is_normalizer"] = bool((Y.mask(nh) == mm).all())
    rep.bound = t_order ** (r * len(omega))
    rep.bound_holds = rep.index**2 >= rep.bound


def _witness_normalizer(Y, m, rep):
    (B,), (omega,) = Y.spec.B, Y.spec.omegas
    TB = as_table(B)
    mm = Y.mask(m)
    inter = mm & Y.mask(Y.base_group())
    comps = _components(Y, Y.elements[inter], 0)
    proj_masks = []
    for q in range(len(omega)):
        arr = np.zeros(TB.n, dtype=bool)
        arr[B.chain.rank_array(comps[:, q, :])] = True
        proj_masks.append(TB.closure(np.flatnonzero(arr).tolist()))
    target = proj_masks[0]
    conj = []
    for pm in proj_masks:
        for b in range(TB.n):
            if TB.conjugate_mask(pm, b) == target:
                conj.append(b)
                break
        else:
            rep.diagnostic = "projections are not conjugate"
            return
    T = table_subgroup(B, target)
    c = Y.group.identity()
    for q, b in enumerate(conj):
        c = c * Y.leaf(0, q, _perm_of(TB, b))
    moved = PermGroup(Y.degree, tuple(c * s * c.inverse() for s in m.generators))
    expected = normalizer_power(Y, T)
    rep.witnesses.update(T_order=T.order(), T_generators=list(T.generators),
                         M_is_normalizer=bool((Y.mask(moved) == Y.mask(expected)).all()))
    rep.bound = (B.order() // T.order()) ** len(omega)
    rep.bound_holds = rep.index >= rep.bound


def _quotient_by_core(Y: SemidirectGroup, m: PermGroup, core: CoreResult):
    """``(Y/M_s, M/M_s)`` with trivial quotient factors dropped."""
    keep, new_b, labels = [], [], []
    for i, (b, n) in enumerate(zip(Y.spec.B, core.normals)):
        if n.order() == b.order():
            continue
        TB = as_table(b)
        Q, label = TB.quotient(subgroup_mask(b, n))
        keep.append(i)
        new_b.append(Q.regular_perm_group(name=f"B{i}/N{i}"))
        labels.append((TB, Q, label))
    if not keep:
        return None
    spec = SemidirectSpec(Y.spec.X, tuple(Y.spec.omegas[i] for i in keep), tuple(new_b),
                          check_standing=False)
    Yq = SemidirectGroup(spec, Y.enum_cap)

    def image(p: Permutation) -> Permutation:
        e = Y.structured(p)
        fs = []
        for j, i in enumerate(keep):
            _, Q, label = labels[j]
            fs.append([_regular(Q, int(label[Y.spec.B[i].chain.rank(f)])) for f in e.fs[i]])
        return Yq.element(e.x, fs)

    return Yq, PermGroup(Yq.degree, tuple(image(s) for s in m.generators))


def _regular(Q: TableGroup, a: int) -> Permutation:
    return Permutation(Q.table[a].tolist(), check=False)


# ---------------------------------------------------------------------------
# counting graph-type classes


@dataclass
class GraphClassCount:
    classes: int
    subgroups: int
    bound: int
    holds: bool


def count_graph_iso_classes(Y: SemidirectGroup, search_cap: int = 10**4) -> GraphClassCount:
    """Classes of clean maximal graph-type subgroups, compared with the stabilizer bound."""
    spec = Y.spec
    if spec.t != 2:
        raise InputError("graph-type subgroups need t = 2")
    om1, om2 = spec.omegas
    B1, B2 = spec.B
    T1, T2 = as_table(B1), as_table(B2)
    X = spec.X
    bound = _graph_bound(X, om1, om2, B1)
    if len(om1) != len(om2):
        return GraphClassCount(0, 0, bound, True)
    isos = lattice.isomorphisms(T1, T2)
    sigmas = []
    for perm in itertools.permutations(om2):
        sigma = dict(zip(om1, perm))
        if all(sigma[x(w)] == x(sigma[w]) for x in X.generators for w in om1):
            sigmas.append(sigma)
    total = len(sigmas) * len(isos) ** len(om1)
    if total > search_cap:
        raise CapError("search cap", search_cap, total, "graph-type enumeration")
    masks = []
    for sigma in sigmas:
        for family in itertools.product(isos, repeat=len(om1)):
            res = construct_graph_iso(Y, sigma, family)
            if res.proper and res.maximal and res.clean and res.surjects:
                masks.append(Y.mask(res.M))
    unique = {m.tobytes(): m for m in masks}
    classes = Y.class_count(list(unique.values()))
    return GraphClassCount(classes, len(unique), bound, classes <= bound)


def _graph_bound(X: PermGroup, om1, om2, B1: PermGroup) -> int:
    elems = X.chain.element_array()
    v1 = om1[0]
    stab1 = elems[:, v1] == v1
    eligible = sum(1 for v2 in om2 if ((elems[:, v2] == v2) == stab1).all())
    out = lattice.automorphisms(B1).out_order if lattice.is_simple(B1) else 0
    return out * eligible


# ---------------------------------------------------------------------------
# invariant partitions of r copies


@dataclass
class PartitionBound:
    omega_size: int
    r: int
    a_omega: int
    a_r_omega: int
    stated: int
    squared: int
    corrected: int

    @property
    def stated_holds(self) -> bool:
        return self.a_r_omega <= self.stated

    @property
    def squared_holds(self) -> bool:
        return self.a_r_omega <= self.squared

    @property
    def corrected_holds(self) -> bool:
        return self.a_r_omega <= self.corrected


def partition_prefactors(omega_size: int, r: int) -> tuple[int, int, int]:
    """Multipliers of ``a_Ω^r`` bounding ``a_{r·Ω}``.

    ``(2|Ω|)^{r-1}`` and ``(2|Ω|^2)^{r-1}`` are the two printed readings;
    ``∏_{j<r} (1 + j|Ω|)`` comes from the pairing argument applied to a
    possibly intransitive first summand, which is valid for every ``r``.
    """
    stated = (2 * omega_size) ** (r - 1)
    squared = (2 * omega_size**2) ** (r - 1)
    corrected = math.prod(1 + j * omega_size for j in range(1, r))
    return stated, squared, corrected


def partition_bound(X: PermGroup, omega: Sequence[int], r: int) -> PartitionBound:
    omega = tuple(sorted(omega))
    a = len(permcore.invariant_partitions(X, omega))
    ar = len(permcore.invariant_partitions(copies_action(X, omega, r)))
    stated, squared, corrected = partition_prefactors(len(omega), r)
    return PartitionBound(len(omega), r, a, ar, stated * a**r, squared * a**r, corrected * a**r)


def has_trivial_center(b: PermGroup) -> bool:
    return popcount(as_table(b).center()) == 1
