"""Decision procedures and the certified generator count for towers.

The convergence argument bounds ζ for each step ``L_{n+1} -> L_n`` by four
case contributions built from a handful of group constants. Here those
bounds are evaluated exactly (or as safe ``log2`` upper bounds when they get
astronomically large), checked for geometric decay, and combined with an
explicit generating tuple into a positive lower bound on ``lim p_k(L_n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import genprob, lattice
from .bounds import ZERO, Bound, int_str, rational_str, log2_lower_int, log2_upper_int, total
from .errors import CapError, InputError, InvariantError, MissingConstantError
from .finite import TableGroup, as_table, popcount
from .permcore import Permutation, PermGroup, block_systems, is_perfect, point_stabilizer, restrict
from .semidirect import partition_prefactors
from .tower import (TowerSpec, abelianization_witness, build_level, fixed_point_witness,
                    fixed_points)

CLIP_BITS = 64
EXACT_HOM_ORDER = 10**5


def _q(x: Fraction) -> str:
    return rational_str(x)


# ---------------------------------------------------------------------------
# decisions


@dataclass
class Verdict:
    decision: str
    reasons: list[str]
    orbit_sizes: list[int]
    perfect: bool
    witnesses: list = field(default_factory=list)

    @property
    def yes(self) -> bool:
        return self.decision == "YES"

    def to_json(self) -> dict:
        out = {"schema": "wreathgen.verdict/1", "decision": self.decision, "reasons": self.reasons,
               "orbit_sizes": self.orbit_sizes, "perfect": self.perfect, "witnesses": []}
        for w in self.witnesses:
            if hasattr(w, "pi"):
                out["witnesses"].append({"kind": "abelianization", "level": w.n + 1,
                                         "target_order": w.pi.target.n,
                                         "images_of_generators": [int(w.pi.images[w.pi.source.generators[i]])
                                                                  for i in range(len(w.pi.source.generators))]})
            else:
                out["witnesses"].append({"kind": "fixed_point", "level": w.n + 1, "point": w.point})
        return out


def decide(spec: TowerSpec, verify_pairs: int = 1000, seed: int = 0) -> Verdict:
    """YES iff ``L`` is perfect and no point of ``D`` is fixed by ``L``."""
    L = spec.base
    perfect, _ = is_perfect(L)
    sizes = [len(o) for o in spec.orbits]
    reasons, witnesses = [], []
    rng = np.random.default_rng(seed)
    if not perfect:
        w = abelianization_witness(spec, 1)
        if not w.verify(rng, verify_pairs):
            raise InvariantError("abelianization witness failed verification")
        reasons.append("L is not perfect: L_2 maps onto a non-trivial abelian group")
        witnesses.append(w)
    fixed = fixed_points(spec)
    if fixed:
        w = fixed_point_witness(spec, 1, fixed[0])
        if not w.verify(rng, verify_pairs):
            raise InvariantError("fixed-point witness failed verification")
        reasons.append(f"point {fixed[0]} is fixed by L, so L_2 maps onto L_1 x L")
        witnesses.append(w)
    if not reasons:
        reasons.append("L is perfect and every L-orbit in D has at least two points")
    return Verdict("NO" if witnesses else "YES", reasons, sizes, perfect, witnesses)


def decide_universal(F: PermGroup, verify_pairs: int = 1000, seed: int = 0) -> Verdict:
    """Criterion on the stabilizer of point 0 acting on the other ``d - 1`` points."""
    if F.degree < 3:
        raise InputError("need d >= 3")
    stab = point_stabilizer(F, 0)
    local = restrict(stab, range(1, F.degree), name=f"Stab({F.name or 'F'}, 0)")
    verdict = decide(TowerSpec(local), verify_pairs, seed)
    verdict.reasons.insert(0, f"point stabilizer has order {local.order()} on {F.degree - 1} points")
    return verdict


# ---------------------------------------------------------------------------
# constants


@dataclass(frozen=True)
class Case2Term:
    """A normal subgroup ``N = T^r`` of a quotient of ``L``."""

    quotient_order: int
    simple_order: int
    r: int
    out: int

    @property
    def order(self) -> int:
        return self.simple_order**self.r


@dataclass
class ConstantsReport:
    C1: int
    C2: int
    C3: int
    C6: int
    C7: int
    C9: int
    K: int
    degree: int
    case2_terms: list[Case2Term]
    provenance: dict[str, str]

    @property
    def C8(self) -> Bound:
        """``C7^((K+1)/2) · |D|^K``."""
        log2 = Fraction(self.K + 1, 2) * log2_upper_int(self.C7) + self.K * log2_upper_int(self.degree)
        if self.K < 64 and (self.K + 1) % 2 == 0:
            return Bound.of(self.C7 ** ((self.K + 1) // 2) * self.degree**self.K)
        return Bound.from_log2(log2)

    def to_json(self) -> dict:
        return {"C1": self.C1, "C2": self.C2, "C3": self.C3, "C6": self.C6, "C7": int_str(self.C7),
                "C8": self.C8.to_json(), "C9": self.C9, "K": int_str(self.K),
                "case2_terms": [t.__dict__ for t in self.case2_terms],
                "provenance": self.provenance}


def _quotients(L: PermGroup) -> list[tuple[int, TableGroup]]:
    G = as_table(L)
    out = []
    for m in lattice.normal_masks(G):
        Q, _ = G.quotient(m)
        out.append((m, Q))
    return out


def _power_of_simple(N: TableGroup):
    """``(|T|, r)`` if ``N`` is ``T^r`` with ``T`` non-abelian simple, else ``None``."""
    if N.n == 1 or N.is_abelian():
        return None
    mins = lattice.minimal_normal_masks(N)
    orders = {popcount(m) for m in mins}
    if len(orders) != 1:
        return None
    t = orders.pop()
    r = round(math.log(N.n, t))
    if t**r != N.n or len(mins) < r:
        return None
    sub, _ = N.subgroup_table(mins[0])
    if sub.is_abelian() or not lattice.is_simple(sub):
        return None
    # the r factors must commute and generate N
    joined = 1
    for m in mins[:r]:
        joined = N.join(joined, N.indices(m).tolist())
    return (t, r) if popcount(joined) == N.n else None


def crude_overrides(spec: TowerSpec) -> dict[str, int]:
    """Valid but very loose values of ``C7`` and ``K``.

    A group of order ``N`` has at most ``N^g`` homomorphisms from a
    ``g``-generated group and at most ``N^floor(log2 N)`` subgroups, since
    every subgroup has a generating set of at most ``log2 N`` elements.
    """
    L = spec.base
    g = max(1, len(L.generators))
    biggest_quotient = max(Q.n for _, Q in _quotients(L))
    orders = [L.order() * biggest_quotient ** len(o) for o in spec.orbits]
    N = max(orders)
    return {"C7": N**g, "K": N ** (N.bit_length() - 1)}


def constants(spec: TowerSpec, overrides: dict | None = None) -> ConstantsReport:
    """The constants feeding the case bounds, each tagged with its provenance."""
    overrides = dict(overrides or {})
    L = spec.base
    if not decide(spec, verify_pairs=50).yes:
        raise InputError("constants are only defined when the decision is YES")
    provenance = {}
    quotients = _quotients(L)
    simple = [Q for _, Q in quotients if Q.n > 1 and lattice.is_simple(Q)]
    values: dict[str, int] = {}
    values["C1"] = len(simple)
    values["C2"] = max((lattice.out_order(Q) for Q in simple), default=1)
    values["C3"] = max(len(block_systems(L, o)) for o in spec.orbits)
    values["C6"] = sum(len(lattice.all_subgroups(Q).nodes) for _, Q in quotients)
    values["C9"] = len(quotients)
    for name in ("C1", "C2", "C3", "C6", "C9"):
        provenance[name] = "computed-exact"
    terms = []
    for _, Q in quotients:
        for m in lattice.normal_masks(Q):
            N, _ = Q.subgroup_table(m)
            shape = _power_of_simple(N)
            if shape is None:
                continue
            t, r = shape
            T, _ = N.subgroup_table(lattice.minimal_normal_masks(N)[0])
            terms.append(Case2Term(Q.n, t, r, lattice.out_order(T)))
    # C7 and K need homomorphisms and subgroups of L ⋉ B^{D_j}
    missing = []
    for name in ("C7", "K"):
        if name in overrides:
            values[name] = int(overrides.pop(name))
            provenance[name] = "user-supplied"
            continue
        exact = _exact_semidirect_constant(spec, quotients, name)
        if exact is None:
            missing.append(name)
        else:
            values[name] = exact
            provenance[name] = "computed-exact"
    if missing:
        raise MissingConstantError(missing, "the semidirect products of L with powers of its quotients "
                                            "exceed the exact caps; supply overrides "
                                            "(CLI: --override NAME=VALUE or --crude)")
    for name, v in overrides.items():
        if name not in values:
            raise InputError(f"unknown constant {name}")
        values[name] = int(v)
        provenance[name] = "user-supplied"
    if any(v < 1 for v in values.values()):
        raise InputError("constants must be at least 1")
    return ConstantsReport(values["C1"], values["C2"], values["C3"], values["C6"], values["C7"],
                           values["C9"], values["K"], spec.d, terms, provenance)


def _exact_semidirect_constant(spec: TowerSpec, quotients, name: str) -> int | None:
    from .semidirect import SemidirectGroup, SemidirectSpec

    L = spec.base
    best = 0
    for _, Q in quotients:
        for orbit in spec.orbits:
            order = L.order() * Q.n ** len(orbit)
            if order > EXACT_HOM_ORDER:
                return None
            if Q.n == 1:
                Y = L
            else:
                B = Q.regular_perm_group()
                Y = SemidirectGroup(SemidirectSpec(L, (orbit,), (B,), check_standing=False)).group
            try:
                if name == "C7":
                    value = lattice.hom_count(L, Y)
                else:
                    lat = lattice.all_subgroups(Y)
                    value = sum(1 for h in lat.nodes if not _abelian_subgroup(lat.group, h.mask))
            except CapError:
                return None
            best = max(best, value)
    return max(best, 1)


def _abelian_subgroup(T: TableGroup, mask: int) -> bool:
    idx = T.indices(mask)
    block = T.table[np.ix_(idx, idx)]
    return bool((block == block.T).all())


# ---------------------------------------------------------------------------
# case bounds


def orbit_sizes(spec: TowerSpec, n: int) -> dict[int, int]:
    """``{size: count}`` over the ``ℓ^n`` orbits of ``L_n`` on words of length ``n``."""
    dist = {1: 1}
    sizes = [len(o) for o in spec.orbits]
    for _ in range(n):
        nxt: dict[int, int] = {}
        for s, c in dist.items():
            for d in sizes:
                nxt[s * d] = nxt.get(s * d, 0) + c
        dist = nxt
    return dist


@dataclass(frozen=True)
class Majorant:
    """``log2(term(n)) <= A + B·n - E·2^n`` for every ``n >= 0``."""

    A: Fraction
    B: Fraction
    E: Fraction

    @property
    def summable(self) -> bool:
        return self.E > 0

    def log2_at(self, n: int) -> Fraction:
        return self.A + self.B * n - self.E * 2**n

    def halving_from(self) -> int | None:
        """Least ``n`` from which each step at least halves the majorant."""
        if not self.summable:
            return None
        n = 0
        while self.E * 2**n < self.B + 1:
            n += 1
        return n

    def tail_from(self, m: int) -> Bound:
        """``Σ_{n >= m} 2^{g(n)}``, valid once ``m`` is past :meth:`halving_from`."""
        start = self.halving_from()
        if start is None or m < start:
            raise InputError("tail requested before geometric decay sets in")
        return Bound.power_of_two(self.log2_at(m) + 1)

    def to_json(self) -> dict:
        return {"A": _q(self.A), "B": _q(self.B), "E": _q(self.E), "summable": self.summable,
                "halving_from": self.halving_from()}


@dataclass
class CaseBounds:
    n: int
    s: int
    cases: dict[str, Bound]
    majorants: dict[str, Majorant]
    flags: dict[str, bool]

    @property
    def total(self) -> Bound:
        return total(self.cases.values())

    def to_json(self) -> dict:
        return {"n": self.n, "s": self.s, "cases": {k: v.to_json() for k, v in self.cases.items()},
                "total": self.total.to_json(), "total_below_one": self.total.lt_one(),
                "flags": self.flags}


def _two_pow_neg(e) -> Bound:
    return Bound.power_of_two(-Fraction(e))


def case_bounds(spec: TowerSpec, consts: ConstantsReport, n: int, k: int) -> CaseBounds:
    """Bounds on the four contributions to ``ζ_{L_{n+1}|L_n}(k)``."""
    if k < 1 or n < 0:
        raise InputError("need k >= 1 and n >= 0")
    ell, D = spec.ell, spec.d
    dist = orbit_sizes(spec, n)
    min_size = min(dist)
    decay = _two_pow_neg(k * 2**n)
    cases: dict[str, Bound] = {}
    maj: dict[str, Majorant] = {}
    # Case 1: pairs of orbits carrying graph-type subgroups
    cases["graph_iso"] = Bound.of(consts.C1**2 * consts.C2) * Bound.of(ell**2 * D) ** n * decay
    maj["graph_iso"] = Majorant(log2_upper_int(consts.C1**2 * consts.C2), log2_upper_int(ell**2 * D), Fraction(k))
    # Case 2: subdiagonals in N = T^r, one orbit at a time
    case2 = ZERO
    c3n = Bound.of(consts.C3) ** n
    for term in consts.case2_terms:
        r = term.r
        for size, count in dist.items():
            pre = max(partition_prefactors(size, r))
            # |N|^{-k|O|/2}, rounding the exponent down keeps it an upper bound
            shrink = Bound.of(Fraction(1, term.order)) ** ((k * size) // 2)
            case2 = case2 + Bound.of(count * pre) * c3n**r * Bound.of(term.out) ** (r * size) * shrink
    cases["subdiagonal"] = case2
    maj["subdiagonal"] = _case2_majorant(spec, consts, k)
    # Case 3: normalizers of T^O
    cases["normalizer_T"] = Bound.of(consts.C6 * ell**n) * decay
    maj["normalizer_T"] = Majorant(log2_upper_int(consts.C6), log2_upper_int(ell), Fraction(k))
    # Case 4: sections, with a(n) <= C8^|O| and one factor C9 for the choice of quotient
    ratio_log = consts.C8.log2 - k
    ratio = consts.C8 * _two_pow_neg(k)
    case4 = ZERO
    for size, count in dist.items():
        case4 = case4 + Bound.of(count * consts.C9) * ratio**size
    cases["section"] = case4
    maj["section"] = Majorant(log2_upper_int(consts.C9), log2_upper_int(ell), -ratio_log)
    flags = {f"{name}_below_one": b.lt_one() for name, b in cases.items()}
    flags.update({f"{name}_summable": m.summable for name, m in maj.items()})
    flags["section_ratio_below_one"] = ratio_log < 0
    flags["min_orbit_size"] = min_size >= 2**n
    return CaseBounds(n, k, cases, maj, flags)


def _case2_majorant(spec: TowerSpec, consts: ConstantsReport, k: int) -> Majorant:
    terms = consts.case2_terms
    if not terms:
        return Majorant(Fraction(-10**6), Fraction(0), Fraction(1))
    logD = log2_upper_int(spec.d)
    logl = log2_upper_int(spec.ell)
    A = B = None
    E = None
    for t in terms:
        r = t.r
        # prefactor <= (max(2, r) |O|^2)^(r-1) with |O| <= |D|^n, and |O| >= 2^n in the decaying factor
        # the case bound floors k|O|/2, which can cost a factor |N|^(1/2)
        a = (r - 1) * log2_upper_int(max(2, r)) + log2_upper_int(t.order) / 2
        b = 2 * (r - 1) * logD + r * log2_upper_int(consts.C3) + logl
        e = Fraction(k, 2) * log2_lower_int(t.order) - r * log2_upper_int(t.out)
        A = a if A is None else max(A, a)
        B = b if B is None else max(B, b)
        E = e if E is None else min(E, e)
    return Majorant(A + log2_upper_int(len(terms)), B, E)


# ---------------------------------------------------------------------------
# sections (counting lemmas)


@dataclass
class SectionBound:
    sizes: tuple[int, ...]
    c7_coefficients: list[Fraction]
    d_coefficients: list[Fraction]
    alpha: int
    beta: int
    closed_c7: Fraction
    closed_d: Fraction
    checks: dict[str, bool]
    log2_recursion: Fraction
    log2_closed: Fraction

    def to_json(self) -> dict:
        return {"sizes": list(self.sizes), "alpha": self.alpha, "beta": self.beta,
                "log2_recursion": _q(self.log2_recursion), "log2_closed": _q(self.log2_closed),
                "checks": self.checks}


def alpha_beta(sizes: Sequence[int]) -> tuple[int, int]:
    """``α_n = Σ_{j=2}^n (j-1) d_{j+1}…d_n`` and ``β_n = Σ_{j=2}^n d_{j+1}…d_n``."""
    n = len(sizes)
    alpha = beta = 0
    for j in range(2, n + 1):
        tail = math.prod(sizes[j:])
        alpha += (j - 1) * tail
        beta += tail
    return alpha, beta


def section_count_bound(spec: TowerSpec, signature: Sequence[int], consts: ConstantsReport) -> SectionBound:
    """Unrolled recursion for the number of sections versus the closed form ``C8^{|O_n|}``.

    ``signature`` lists orbit indices ``i_1 … i_n``. The recursion step is
    ``a(j) <= a(j-1)^{d_j} · |D|^{K(j-1)} · C7^K`` with ``a(1) <= C7``, so
    ``log2 a(n)`` is tracked as ``c7 · log2 C7 + cD · log2 |D|``.
    """
    sizes = tuple(len(spec.orbits[i]) for i in signature)
    if not sizes:
        raise InputError("signature must have length at least 1")
    K = consts.K
    c7, cd = [Fraction(1)], [Fraction(0)]
    for j in range(2, len(sizes) + 1):
        d = sizes[j - 1]
        c7.append(d * c7[-1] + K)
        cd.append(d * cd[-1] + K * (j - 1))
    n = len(sizes)
    alpha, beta = alpha_beta(sizes)
    orbit = math.prod(sizes)
    closed_c7 = Fraction(orbit * (K + 1), 2)
    closed_d = Fraction(orbit * K)
    tail3 = math.prod(sizes[2:])
    checks = {
        "alpha_matches": cd[-1] == K * alpha,
        "beta_matches": c7[-1] == math.prod(sizes[1:]) + K * beta,
        "alpha_bound": alpha <= 4 * tail3,
        "beta_bound": beta <= 2 * tail3,
        "closed_dominates": c7[-1] <= closed_c7 and cd[-1] <= closed_d if n >= 2 else c7[-1] <= closed_c7,
    }
    lc7, ld = log2_upper_int(consts.C7), log2_upper_int(spec.d)
    return SectionBound(sizes, c7, cd, alpha, beta, closed_c7, closed_d, checks,
                        c7[-1] * lc7 + cd[-1] * ld, closed_c7 * lc7 + closed_d * ld)


# ---------------------------------------------------------------------------
# certificate


@dataclass
class Certificate:
    k1: int
    n1: int
    k2: int
    generating_tuple: list[str]
    constants: ConstantsReport
    table: list[CaseBounds]
    horizon: int
    tail_sum: Bound
    pk_base: Fraction
    tail_lower_bound: Fraction
    flags: dict[str, bool]

    @property
    def k(self) -> int:
        return max(self.k1, self.k2)

    def to_json(self) -> dict:
        return {"schema": "wreathgen.certificate/1", "k1": int_str(self.k1), "n1": self.n1, "k2": self.k2,
                "k": int_str(self.k), "generating_tuple": self.generating_tuple,
                "constants": self.constants.to_json(),
                "table": [row.to_json() for row in self.table],
                "majorants": {name: m.to_json() for name, m in self.table[0].majorants.items()},
                "horizon": self.horizon, "tail_sum": self.tail_sum.to_json(),
                "pk_base_lower": _q(self.pk_base),
                "tail_lower_bound": _q(self.tail_lower_bound), "flags": self.flags}


@dataclass
class _Plan:
    n1: int
    last: int
    rows: list[CaseBounds]
    tail: Bound


def _plan(spec: TowerSpec, consts: ConstantsReport, s: int, horizon: int, max_level: int = 64) -> _Plan | None:
    """Levels from which every ζ bound stays below 1, or ``None`` at this ``s``."""
    probe = case_bounds(spec, consts, 1, s)
    if not all(m.summable for m in probe.majorants.values()):
        return None
    start = max(m.halving_from() for m in probe.majorants.values())
    rows = []
    n1 = None
    n = 1
    while True:
        row = case_bounds(spec, consts, n, s)
        rows.append(row)
        if row.total.lt_one():
            if n1 is None:
                n1 = n
        else:
            n1 = None
        if n1 is not None and n >= max(start, n1 + horizon - 1):
            last = n
            tail = total(m.tail_from(last + 1) for m in row.majorants.values())
            if tail.lt_one():
                break
        if n >= max_level:
            return None
        n += 1
    return _Plan(n1, last, [r for r in rows if r.n >= n1], tail)


def _least_k1(spec: TowerSpec, consts: ConstantsReport, horizon: int) -> int:
    hi = 2
    while _plan(spec, consts, hi - 1, horizon) is None:
        hi *= 2
        if hi.bit_length() > 1 << 16:
            raise CapError("search cap", 1 << 16, hi.bit_length(), "k_1 search")
    lo = max(2, hi // 2)
    if lo == hi or _plan(spec, consts, lo - 1, horizon) is not None:
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _plan(spec, consts, mid - 1, horizon) is None:
            lo = mid
        else:
            hi = mid
    return hi


def pk_lower_bound(g: PermGroup, k: int) -> Fraction:
    """Rigorous lower bound on ``p_k``: exact when cheap, else ``1 - Σ_M [G:M]^{-k}``."""
    G = as_table(g)
    if G.n == 1:
        return Fraction(1)
    if k * G.n.bit_length() <= 4096:
        return lattice.pk_exact_mobius(G, k)
    union = ZERO
    for c in lattice.maximal_subgroups(G):
        union = union + Bound.of(c.class_size) * Bound.from_log2(-k * log2_lower_int(c.index))
    return max(Fraction(0), 1 - union.upper(CLIP_BITS))


def certified_k(spec: TowerSpec, consts: ConstantsReport | None = None, overrides: dict | None = None,
                horizon: int = 4, seed: int = 0, budget: int = 10**5,
                max_generators: int = 8) -> Certificate:
    if not decide(spec, verify_pairs=50).yes:
        raise InputError("the tower is not topologically finitely generated; no certificate")
    if consts is None:
        consts = constants(spec, overrides)
    k1 = _least_k1(spec, consts, horizon)
    plan = _plan(spec, consts, k1 - 1, horizon)
    level = build_level(spec, plan.n1)
    k2, found = None, None
    for kk in range(2, max_generators + 1):
        found = genprob.find_generating_tuple(level, kk, budget, seed)
        if found is not None:
            k2 = kk
            break
    if found is None:
        raise CapError("sample budget", budget, budget + 1, "generating tuple search")
    tuple_perms = [Permutation(row.tolist()) for row in found]
    verified = PermGroup(level.degree, tuple(tuple_perms)).order() == level.order()
    k = max(k1, k2)
    # lower bound on p_k(L_{n1}) via Prop 1.1 from level 1 up to n1
    pk_base = pk_lower_bound(spec.base, k)
    for n in range(1, plan.n1):
        z = case_bounds(spec, consts, n, k - 1).total
        pk_base *= max(Fraction(0), 1 - z.upper(CLIP_BITS)) if z.lt_one() else Fraction(0)
    at_k = [case_bounds(spec, consts, n, k - 1) for n in range(plan.n1, plan.last + 1)]
    zetas = [row.total.upper(CLIP_BITS) for row in at_k]
    tail_k = total(m.tail_from(plan.last + 1) for m in at_k[-1].majorants.values())
    tb = genprob.tail_bound(zetas, pk_base, tail_k.upper(CLIP_BITS)) if pk_base > 0 else None
    flags = {
        "all_cases_summable_at_k1": all(m.summable for m in plan.rows[0].majorants.values()),
        "total_below_one_at_n1": plan.rows[0].total.lt_one(),
        "all_rows_below_one": all(r.total.lt_one() for r in plan.rows),
        "tail_below_one": plan.tail.lt_one(),
        "generating_tuple_verified": verified,
        "tail_bound_positive": tb is not None and not tb.void and tb.value > 0,
    }
    if not all(flags.values()):
        raise InvariantError(f"certificate flags inconsistent: {flags}")
    return Certificate(k1, plan.n1, k2, [str(p) for p in tuple_perms], consts, plan.rows,
                       plan.last, plan.tail, pk_base, tb.value, flags)
