"""Generation probabilities, ζ over maximal subgroups, and the tail product."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import lattice
from .bounds import rational_str
from .errors import CapError, InputError
from .finite import Hom, TableGroup, as_table
from .permcore import PermGroup, generated_order_at_least

EXHAUSTIVE_CAP = 10**7
WILSON_Z = Fraction(49, 25)
SQRT_BITS = 64
MC_CHUNK = 10**4


def pk_exact_exhaustive(g, k: int, cap: int = EXHAUSTIVE_CAP) -> Fraction:
    """Fraction of the ``|G|^k`` tuples that generate ``G``.

    Tuples are enumerated one coordinate at a time, keeping a tally per
    generated subgroup; the next coordinate only matters through its coset
    of that subgroup, so each join is computed once per coset.
    """
    if k < 1:
        raise InputError("k must be positive")
    G = as_table(g)
    if G.n**k > cap:
        raise CapError("exhaustive tuple cap", cap, G.n**k, "pk_exact_exhaustive")
    if G.n == 1:
        return Fraction(1)
    tally = {1: 1}
    for _ in range(k):
        nxt: dict[int, int] = {}
        for mask, count in tally.items():
            inside = G.bool_of(mask)
            h = np.flatnonzero(inside)
            seen = inside.copy()
            nxt[mask] = nxt.get(mask, 0) + count * len(h)
            for b in range(G.n):
                if seen[b]:
                    continue
                coset = G.table[h, b]
                seen[coset] = True
                joined = G.join(mask, [b])
                nxt[joined] = nxt.get(joined, 0) + count * len(h)
        tally = nxt
    return Fraction(tally.get(G.full_mask(), 0), G.n**k)


def pk_exact(g, k: int) -> Fraction:
    """Exact p_k, by exhaustion when small enough and otherwise through μ."""
    G = as_table(g)
    if G.n**k <= EXHAUSTIVE_CAP:
        return pk_exact_exhaustive(G, k)
    return lattice.pk_exact_mobius(G, k)


# ---------------------------------------------------------------------------
# Monte Carlo


def _sqrt_upper(x: Fraction) -> Fraction:
    scale = 1 << SQRT_BITS
    return Fraction(math.isqrt(math.floor(x * scale * scale)) + 1, scale)


def wilson_interval(successes: int, samples: int, z: Fraction = WILSON_Z) -> tuple[Fraction, Fraction]:
    """Wilson score interval with the square root rounded outward."""
    if samples <= 0 or not 0 <= successes <= samples:
        raise InputError("need 0 <= successes <= samples and samples > 0")
    n = Fraction(samples)
    p = Fraction(successes, samples)
    z2 = z * z
    centre = p + z2 / (2 * n)
    spread = z * _sqrt_upper(p * (1 - p) / n + z2 / (4 * n * n))
    den = 1 + z2 / n
    return max(Fraction(0), (centre - spread) / den), min(Fraction(1), (centre + spread) / den)


@dataclass(frozen=True)
class PkResult:
    group: str
    k: int
    mode: str
    value: Fraction
    samples: int | None = None
    successes: int | None = None
    interval: tuple[Fraction, Fraction] | None = None

    @property
    def sigma(self) -> float:
        if self.samples is None:
            return 0.0
        p = float(self.value)
        return math.sqrt(p * (1 - p) / self.samples)

    def contains(self, x: Fraction) -> bool:
        if self.interval is None:
            return self.value == x
        return self.interval[0] <= x <= self.interval[1]

    def to_json(self) -> dict:
        out = {"group": self.group, "k": self.k, "mode": self.mode, "value": _q(self.value)}
        if self.interval is not None:
            out.update(samples=self.samples, successes=self.successes,
                       interval=[_q(self.interval[0]), _q(self.interval[1])])
        return out


def _q(x: Fraction) -> str:
    return rational_str(x)


class _GenerationTest:
    """Decides whether k-tuples of permutations generate the group, with memoization."""

    def __init__(self, g: PermGroup, table_cap: int = 5000):
        self.g = g
        self.order = g.order()
        self.degree = g.degree
        self.table = as_table(g) if self.order <= table_cap else None
        self.memo: dict[tuple, bool] = {}

    def _by_ranks(self, ranks: tuple) -> bool:
        hit = self.memo.get(ranks)
        if hit is None:
            hit = self.table.closure_size(list(ranks)) == self.order
            self.memo[ranks] = hit
        return hit

    def __call__(self, rows: np.ndarray) -> bool:
        return bool(self.batch(rows[None])[0])

    def batch(self, draws: np.ndarray) -> np.ndarray:
        """``draws`` has shape ``(samples, k, degree)``."""
        samples, k, _ = draws.shape
        if self.table is not None:
            ranks = self.g.chain.rank_array(draws.reshape(-1, self.degree)).reshape(samples, k)
            uniq, inverse = np.unique(np.sort(ranks, axis=1), axis=0, return_inverse=True)
            verdict = np.array([self._by_ranks(tuple(int(v) for v in row)) for row in uniq])
            return verdict[inverse.reshape(-1)]
        return np.array([generated_order_at_least([tuple(r.tolist()) for r in rows], self.degree,
                                                  self.order) for rows in draws])


@lru_cache(maxsize=32)
def _generation_test(g: PermGroup) -> _GenerationTest:
    return _GenerationTest(g)


def _mc_hits(g: PermGroup, k: int, samples: int, stream: np.random.SeedSequence) -> int:
    test = _generation_test(g)
    if test.order == 1:
        return samples
    rng = np.random.default_rng(stream)
    draws = g.chain.random_elements(samples * k, rng).reshape(samples, k, g.degree)
    return int(test.batch(draws).sum())


def pk_montecarlo(g: PermGroup, k: int, samples: int, seed: int, name: str | None = None,
                  threads: int = 1) -> PkResult:
    """Estimate p_k from i.i.d. uniform k-tuples drawn through the stabilizer chain.

    Samples are split into fixed-size chunks, each with its own stream spawned
    from ``seed``, so the result does not depend on ``threads``.
    """
    if samples < 100:
        raise InputError("at least 100 samples are required")
    if k < 1:
        raise InputError("k must be positive")
    sizes = [MC_CHUNK] * (samples // MC_CHUNK)
    if samples % MC_CHUNK:
        sizes.append(samples % MC_CHUNK)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    _generation_test(g)  # build the shared memo before any worker starts
    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(threads) as pool:
            hits = sum(pool.map(lambda job: _mc_hits(g, k, *job), zip(sizes, streams)))
    else:
        hits = sum(_mc_hits(g, k, n, s) for n, s in zip(sizes, streams))
    return PkResult(name or g.name or "G", k, "mc", Fraction(hits, samples), samples, hits,
                    wilson_interval(hits, samples))


def find_generating_tuple(g: PermGroup, k: int, budget: int, seed: int) -> np.ndarray | None:
    """First sampled k-tuple that generates ``g`` (checked by order), or ``None``."""
    rng = np.random.default_rng(seed)
    test = _generation_test(g)
    if test.order == 1:
        return np.tile(np.arange(g.degree), (k, 1))
    for _ in range(budget):
        rows = g.chain.random_elements(k, rng)
        if test(rows):
            return rows
    return None


# ---------------------------------------------------------------------------
# ζ and the inequality


@dataclass(frozen=True)
class ZetaTerm:
    index: int
    classes: int
    term: Fraction


@dataclass(frozen=True)
class ZetaValue:
    s: int
    terms: tuple[ZetaTerm, ...]

    @property
    def total(self) -> Fraction:
        return sum((t.term for t in self.terms), Fraction(0))

    def to_json(self) -> dict:
        return {"s": self.s, "total": _q(self.total),
                "terms": [{"index": str(t.index), "classes": t.classes, "term": _q(t.term)}
                          for t in self.terms]}


def surjecting_maximal_classes(Y, pi: Hom, cap: int = lattice.DEFAULT_LATTICE_CAP):
    G = as_table(Y)
    if pi.source is not G:
        raise InputError("the map must be defined on the given group")
    full = pi.target.full_mask()
    return [c for c in lattice.maximal_subgroups(G, cap) if pi.image_mask(c.representative.mask) == full]


def zeta(Y, pi: Hom, s: int, cap: int = lattice.DEFAULT_LATTICE_CAP) -> ZetaValue:
    """Σ 1/[Y:M]^s over classes of proper maximal M with π(M) = X."""
    if s < 0:
        raise InputError("s must be non-negative")
    counts: dict[int, int] = {}
    for c in surjecting_maximal_classes(Y, pi, cap):
        counts[c.index] = counts.get(c.index, 0) + 1
    terms = tuple(ZetaTerm(i, n, Fraction(n, i**s)) for i, n in sorted(counts.items()))
    return ZetaValue(s, terms)


def quotient_map(g, normal_mask: int) -> Hom:
    G = as_table(g)
    Q, label = G.quotient(normal_mask)
    return Hom(G, Q, label)


def identity_map(g) -> Hom:
    G = as_table(g)
    return Hom(G, G, np.arange(G.n))


def trivial_map(g) -> Hom:
    G = as_table(g)
    return Hom(G, TableGroup.trivial(), np.zeros(G.n, dtype=np.int64))


@dataclass(frozen=True)
class InequalityReport:
    k: int
    lhs: Fraction
    zeta: Fraction
    pk_quotient: Fraction

    @property
    def rhs(self) -> Fraction:
        return (1 - self.zeta) * self.pk_quotient

    @property
    def slack(self) -> Fraction:
        return self.lhs - self.rhs

    @property
    def holds(self) -> bool:
        return self.lhs >= self.rhs

    def to_json(self) -> dict:
        return {"k": self.k, "pk_Y": _q(self.lhs), "zeta": _q(self.zeta),
                "pk_X": _q(self.pk_quotient), "rhs": _q(self.rhs), "slack": _q(self.slack),
                "holds": self.holds}


def bhattacharjee_check(Y, pi: Hom, k: int) -> InequalityReport:
    """Compare p_k(Y) with (1 - ζ_{Y|X}(k-1)) p_k(X), all exact."""
    if k < 1:
        raise InputError("k must be positive")
    if not pi.is_surjective():
        raise InputError("the map must be surjective")
    G = as_table(Y)
    return InequalityReport(k, pk_exact(G, k), zeta(G, pi, k - 1).total, pk_exact(pi.target, k))


# ---------------------------------------------------------------------------
# tail product


@dataclass(frozen=True)
class TailBound:
    void: bool
    value: Fraction
    partial_products: tuple[Fraction, ...] = field(default=())
    reason: str = ""


def tail_bound(zetas: Sequence[Fraction], pk_base: Fraction, tail: Fraction = Fraction(0)) -> TailBound:
    """``pk_base · ∏(1 - ζ_n) · (1 - tail)``, where ``tail`` bounds the sum of the remaining ζ_n.

    The last factor is the Weierstrass inequality ``∏(1 - z) ≥ 1 - Σ z``.
    """
    if not 0 < pk_base <= 1:
        raise InputError("pk_base must lie in (0, 1]")
    for n, z in enumerate(zetas):
        if z < 0:
            raise InputError("ζ values are non-negative")
        if z >= 1:
            return TailBound(True, Fraction(0), reason=f"term {n} is {z} >= 1")
    if not 0 <= tail < 1:
        return TailBound(True, Fraction(0), reason=f"tail sum bound {tail} is not below 1")
    value = Fraction(pk_base)
    partial = []
    for z in zetas:
        value *= 1 - z
        partial.append(value)
    return TailBound(False, value * (1 - tail), tuple(partial))
