"""Table-backed finite groups.

Small groups (order up to a few thousand) are materialised as a full
multiplication table over element indices. Subgroups are Python ints used as
bitmasks over those indices, which keeps intersection and inclusion tests cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import CapError, InputError
from .permcore import Permutation, PermGroup

DEFAULT_TABLE_CAP = 10_000


def _dtype_for(n: int):
    return np.int16 if n < 2**15 else np.int32


def mask_from_bool(arr: np.ndarray) -> int:
    return int.from_bytes(np.packbits(arr.astype(np.uint8), bitorder="little").tobytes(), "little")


def mask_from_indices(idx: Iterable[int]) -> int:
    m = 0
    for i in idx:
        m |= 1 << int(i)
    return m


def popcount(m: int) -> int:
    return bin(m).count("1")


class TableGroup:
    """A finite group on element indices ``0..n-1`` with identity ``0``."""

    def __init__(self, table: np.ndarray, generators: Sequence[int] | None = None, *,
                 perms: np.ndarray | None = None, name: str | None = None,
                 factors: tuple | None = None):
        table = np.asarray(table)
        n = table.shape[0]
        if table.shape != (n, n):
            raise InputError("multiplication table must be square")
        if not (table[0] == np.arange(n)).all() or not (table[:, 0] == np.arange(n)).all():
            raise InputError("element 0 must be the identity")
        self.table = table.astype(_dtype_for(n), copy=False)
        self.n = n
        self.perms = perms
        self.name = name
        # direct-product bookkeeping: (G1, G2) with index = i1 * |G2| + i2
        self.factors = factors
        inv = np.argmax(self.table == 0, axis=1)
        self.inv = inv.astype(_dtype_for(n))
        if generators is None:
            generators = self._greedy_generators()
        self.generators = tuple(int(g) for g in generators)
        if self.closure_size(self.generators) != n:
            raise InputError("given generators do not generate the group")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_perm_group(cls, g: PermGroup, cap: int = DEFAULT_TABLE_CAP) -> TableGroup:
        order = g.order()
        if order > cap:
            raise CapError("table cap", cap, order, f"tabulating {g.name or 'group'}")
        chain = g.chain
        E = chain.element_array(cap)
        deg = g.degree
        n = len(E)
        # identity first: the rank order already starts with it
        base = np.array(chain.base, dtype=np.int64)
        if len(base) == 0:
            table = np.zeros((1, 1), dtype=np.int16)
            return cls(table, [], perms=E, name=g.name)
        EB = E[:, base].astype(np.int64)
        radix = np.int64(deg) ** np.arange(len(base), dtype=np.int64)
        if float(deg) ** len(base) >= 2.0**62:
            raise CapError("table key width", 62, len(base), "base too long for table keys")
        keys = EB @ radix
        order_idx = np.argsort(keys)
        sorted_keys = keys[order_idx]
        table = np.empty((n, n), dtype=_dtype_for(n))
        for i in range(n):
            prod_keys = E[i][EB] @ radix
            table[i] = order_idx[np.searchsorted(sorted_keys, prod_keys)]
        gens = [chain.rank(s) for s in g.generators if not s.is_identity()]
        return cls(table, gens, perms=E, name=g.name)

    @classmethod
    def trivial(cls) -> TableGroup:
        return cls(np.zeros((1, 1), dtype=np.int16), [], name="1")

    def direct_product(self, other: TableGroup, name: str | None = None) -> TableGroup:
        n1, n2 = self.n, other.n
        if n1 * n2 > DEFAULT_TABLE_CAP:
            raise CapError("table cap", DEFAULT_TABLE_CAP, n1 * n2, "direct product")
        t1 = self.table.astype(np.int32)
        t2 = other.table.astype(np.int32)
        table = (t1[:, None, :, None] * n2 + t2[None, :, None, :]).reshape(n1 * n2, n1 * n2)
        gens = [a * n2 for a in self.generators] + list(other.generators)
        return TableGroup(table, gens, name=name, factors=(self, other))

    def quotient(self, normal_mask: int) -> tuple[TableGroup, np.ndarray]:
        """Quotient by a normal subgroup; returns the group and the projection array."""
        if not self.is_normal(normal_mask):
            raise InputError("quotient by a non-normal subgroup")
        N = self.indices(normal_mask)
        label = np.full(self.n, -1, dtype=np.int64)
        reps = []
        for g in range(self.n):
            if label[g] >= 0:
                continue
            label[self.table[g, N]] = len(reps)
            reps.append(g)
        reps = np.array(reps)
        qt = label[self.table[np.ix_(reps, reps)]]
        gens = sorted({int(label[s]) for s in self.generators} - {0})
        return TableGroup(qt, gens), label

    # -- element helpers -------------------------------------------------

    @property
    def order(self) -> int:
        return self.n

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != 0:
            x = int(self.table[x, a])
            k += 1
        return k

    @cached_property
    def element_orders(self) -> np.ndarray:
        return np.array([self.element_order(a) for a in range(self.n)])

    def conj(self, g: int, x):
        """g x g^-1 (vectorised over x)."""
        return self.table[self.table[g, x], self.inv[g]]

    def _greedy_generators(self) -> list[int]:
        gens: list[int] = []
        mask = np.zeros(self.n, dtype=bool)
        mask[0] = True
        for a in range(self.n):
            if not mask[a]:
                gens.append(a)
                mask = self.closure_bool(gens)
        return gens

    # -- subgroups as bitmasks -------------------------------------------

    def closure_bool(self, gens: Sequence[int]) -> np.ndarray:
        elems = np.zeros(self.n, dtype=bool)
        elems[0] = True
        gens = np.array([g for g in gens if g != 0], dtype=np.int64)
        if gens.size == 0:
            return elems
        frontier = np.array([0])
        while frontier.size:
            prods = self.table[np.ix_(frontier, gens)].ravel()
            new = np.unique(prods[~elems[prods]])
            elems[new] = True
            frontier = new
        return elems

    def closure(self, gens: Sequence[int]) -> int:
        return mask_from_bool(self.closure_bool(gens))

    def join(self, mask: int, extra: Sequence[int]) -> int:
        """Subgroup generated by the subgroup ``mask`` and ``extra``, by repeated squaring."""
        elems = self.bool_of(mask)
        elems[list(extra)] = True
        size = int(elems.sum())
        while True:
            idx = np.flatnonzero(elems)
            elems[self.table[np.ix_(idx, idx)].ravel()] = True
            new_size = int(elems.sum())
            if new_size == size:
                return mask_from_bool(elems)
            size = new_size

    def closure_size(self, gens: Sequence[int]) -> int:
        return int(self.closure_bool(gens).sum())

    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def bool_of(self, mask: int) -> np.ndarray:
        nbytes = (self.n + 7) // 8
        raw = np.frombuffer(mask.to_bytes(nbytes, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.n].astype(bool)

    def indices(self, mask: int) -> np.ndarray:
        return np.flatnonzero(self.bool_of(mask))

    def conjugate_mask(self, mask: int, g: int) -> int:
        idx = self.indices(mask)
        arr = np.zeros(self.n, dtype=bool)
        arr[self.conj(g, idx)] = True
        return mask_from_bool(arr)

    def is_normal(self, mask: int) -> bool:
        return all(self.conjugate_mask(mask, g) == mask for g in self.generators)

    def normalizer(self, mask: int) -> int:
        idx = self.indices(mask)
        keep = np.zeros(self.n, dtype=bool)
        H = self.bool_of(mask)
        for g in range(self.n):
            keep[g] = H[self.conj(g, idx)].all()
        return mask_from_bool(keep)

    def center(self) -> int:
        gens = np.array(self.generators, dtype=np.int64)
        if gens.size == 0:
            return 1
        central = (self.table[:, gens] == self.table[gens, :].T).all(axis=1)
        return mask_from_bool(central)

    def is_abelian(self) -> bool:
        return self.center() == self.full_mask()

    def subgroup_generators(self, mask: int) -> list[int]:
        """Small generating set of a subgroup (greedy over its elements)."""
        gens: list[int] = []
        got = 1
        for a in self.indices(mask):
            if not (got >> int(a)) & 1:
                gens.append(int(a))
                got = self.closure(gens)
                if got == mask:
                    break
        return gens

    def subgroup_table(self, mask: int) -> tuple[TableGroup, np.ndarray]:
        """The subgroup as a standalone table group, plus its embedding array."""
        idx = self.indices(mask)
        pos = np.full(self.n, -1, dtype=np.int64)
        pos[idx] = np.arange(len(idx))
        sub = pos[self.table[np.ix_(idx, idx)]]
        gens = [int(pos[g]) for g in self.subgroup_generators(mask)]
        return TableGroup(sub, gens), idx

    # -- permutation realisation ----------------------------------------

    def regular_perm_group(self, name: str | None = None) -> PermGroup:
        """Left regular representation, degree = order."""
        gens = tuple(Permutation(self.table[g].tolist(), check=False) for g in self.generators)
        if not gens:
            gens = (Permutation.identity(max(self.n, 1)),)
        return PermGroup(max(self.n, 1), gens, name or self.name)

    def as_perm_group(self, name: str | None = None) -> PermGroup:
        if self.perms is not None and len(self.generators):
            deg = self.perms.shape[1]
            gens = tuple(Permutation(self.perms[g].tolist(), check=False) for g in self.generators)
            return PermGroup(deg, gens, name or self.name)
        return self.regular_perm_group(name)

    def __repr__(self) -> str:
        return f"<TableGroup {self.name or ''} order={self.n}>"


@lru_cache(maxsize=64)
def _table_of(g: PermGroup, cap: int) -> TableGroup:
    return TableGroup.from_perm_group(g, cap)


def as_table(g, cap: int = DEFAULT_TABLE_CAP) -> TableGroup:
    if isinstance(g, TableGroup):
        return g
    if isinstance(g, PermGroup):
        return _table_of(g, cap)
    raise InputError(f"not a group value: {g!r}")


@dataclass(frozen=True, eq=False)
class Hom:
    """Homomorphism between table groups as an index array."""

    source: TableGroup
    target: TableGroup
    images: np.ndarray = field(repr=False)

    def __call__(self, a: int) -> int:
        return int(self.images[a])

    def image_mask(self, mask: int | None = None) -> int:
        idx = np.arange(self.source.n) if mask is None else self.source.indices(mask)
        arr = np.zeros(self.target.n, dtype=bool)
        arr[self.images[idx]] = True
        return mask_from_bool(arr)

    def is_surjective(self) -> bool:
        return self.image_mask() == self.target.full_mask()

    def kernel(self) -> int:
        return mask_from_bool(self.images == 0)


def extend_to_hom(source: TableGroup, target: TableGroup, gen_images: Sequence[int],
                  gens: Sequence[int] | None = None) -> Hom | None:
    """Extend generator images to a homomorphism, or ``None`` if impossible.

    Every edge ``x -> x*s`` of the Cayley graph is checked, which is
    equivalent to checking all relations of the source.
    """
    gens = list(source.generators if gens is None else gens)
    if len(gens) != len(gen_images):
        raise InputError("one image per generator required")
    n = source.n
    phi = np.full(n, -1, dtype=np.int64)
    phi[0] = 0
    g_arr = np.array(gens, dtype=np.int64)
    v_arr = np.array(gen_images, dtype=np.int64)
    if g_arr.size == 0:
        return Hom(source, target, np.zeros(n, dtype=np.int64)) if n == 1 else None
    frontier = np.array([0])
    while frontier.size:
        y = source.table[np.ix_(frontier, g_arr)]
        val = target.table[phi[frontier][:, None], v_arr[None, :]]
        y = y.ravel()
        val = val.ravel()
        fresh = phi[y] < 0
        if not fresh.any():
            break
        ys, first = np.unique(y[fresh], return_index=True)
        phi[ys] = val[fresh][first]
        frontier = ys
    if (phi < 0).any():
        return None
    lhs = phi[source.table[:, g_arr]]
    rhs = target.table[phi[:, None], v_arr[None, :]]
    if not (lhs == rhs).all():
        return None
    return Hom(source, target, phi)


def hom_from_perm_images(source: PermGroup, target: PermGroup, images: Sequence[Permutation],
                         cap: int = DEFAULT_TABLE_CAP) -> tuple[TableGroup, TableGroup, Hom]:
    """Homomorphism defined by images of the source's generators (verified)."""
    S = as_table(source, cap)
    T = as_table(target, cap)
    src_gens = [source.chain.rank(g) for g in source.generators]
    for x in images:
        if not target.contains(x):
            raise InputError(f"image {x} is not in the target group")
    tgt_imgs = [target.chain.rank(x) for x in images]
    h = extend_to_hom(S, T, tgt_imgs, src_gens)
    if h is None:
        raise InputError("generator images do not define a homomorphism")
    return S, T, h
