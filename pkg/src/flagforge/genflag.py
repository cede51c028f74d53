"""Generalized flags, closedness predicates, taut couples.

Finite flags are strictly increasing chains of canonical subspaces running
from 0 to the full space; a pair is a consecutive (predecessor, successor)
entry.  Flags with infinitely many pairs are supported in pure-basis form
only (BasisOrderFlag), as an ordered list of blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cmp_to_key

from .epcore import EpSet, stabilization_window
from .pairedspace import (
    SIDE_V,
    SIDE_W,
    ModelMismatch,
    SideMismatch,
    Subspace,
    Vector,
    closure,
    form_perp,
    is_closed,
    other_side,
    pair,
    perp,
)


class NotAChain(ValueError):
    def __init__(self, a, b):
        self.witness = (a, b)
        super().__init__("subspaces are not totally ordered by inclusion")


class NotTaut(ValueError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"perp of {witness!r} is not an element of the partner flag")


class NotSemiclosed(ValueError):
    pass


class FinitePairFlag:
    """Strictly increasing chain 0 = C_0 < C_1 < ... < C_k = full space."""

    __slots__ = ("model", "side", "chain")

    def __init__(self, model, side, chain: tuple[Subspace, ...]):
        self.model = model
        self.side = side
        self.chain = chain

    @property
    def pairs(self):
        return [(self.chain[i], self.chain[i + 1]) for i in range(len(self.chain) - 1)]

    def n_pairs(self) -> int:
        return len(self.chain) - 1

    def __eq__(self, other):
        return (
            isinstance(other, FinitePairFlag)
            and self.side == other.side
            and self.chain == other.chain
        )

    def __hash__(self):
        return hash((self.side, self.chain))

    def __repr__(self):
        dims = [s.dim() if s.dim() is not None else "inf" for s in self.chain]
        return f"FinitePairFlag({self.side}, dims {dims})"


def flag_from_chain(model, side, chain) -> FinitePairFlag:
    """Deduplicate, order by inclusion, complete with 0 and the full space."""
    subs = []
    for s in chain:
        if s.side != side:
            raise SideMismatch("chain member on the wrong side")
        if s.model != model:
            raise ModelMismatch("chain member from a different model")
        if s not in subs:
            subs.append(s)
    zero = Subspace.zero(model, side)
    full = Subspace.full(model, side)
    for endpoint in (zero, full):
        if endpoint not in subs:
            subs.append(endpoint)

    def cmp(a, b):
        if a == b:
            return 0
        if b.contains(a):
            return -1
        if a.contains(b):
            return 1
        raise NotAChain(a, b)

    subs.sort(key=cmp_to_key(cmp))
    return FinitePairFlag(model, side, tuple(subs))


@dataclass
class FlagClassification:
    semiclosed: bool
    closed: bool
    maximal_semiclosed: bool
    pair_closures: tuple  # per pair: ("closed" | "dense" | "neither")


def quotient_dim(pred: Subspace, succ: Subspace):
    """dim(succ / pred); math.inf for infinite quotients."""
    gap = succ.aligned.difference(pred.aligned)
    if not gap.is_finite():
        return math.inf
    gens = [Vector.basis_vector(succ.model, succ.side, i) for i in gap.members_below(gap.threshold)]
    gens += list(succ.corrections)
    dim = 0
    seen = pred
    for g in gens:
        if not seen.member(g):
            seen = seen.sum(Subspace.span(succ.model, succ.side, gens=[g]))
            dim += 1
    return dim


def classify_flag(f: FinitePairFlag) -> FlagClassification:
    semiclosed = True
    closed_flag = True
    maximal = True
    kinds = []
    closures = {s: closure(s) for s in f.chain}
    for pred, succ in f.pairs:
        cl = closures[pred]
        if cl == pred:
            kinds.append("closed")
            if quotient_dim(pred, succ) != 1:
                maximal = False
        elif cl == succ:
            kinds.append("dense")
        else:
            kinds.append("neither")
            semiclosed = False
        if closures[succ] != succ:
            closed_flag = False
    closed_flag = closed_flag and semiclosed
    maximal = maximal and semiclosed
    return FlagClassification(semiclosed, closed_flag, maximal, tuple(kinds))


def pairing_is_zero(a: Subspace, b: Subspace) -> bool:
    """Exact decision of <a, b> = 0 for a in V and b in V*."""
    if a.side != SIDE_V or b.side != SIDE_W:
        raise SideMismatch("pairing_is_zero wants (V, V*) subspaces")
    model = a.model
    if not a.aligned.intersection(b.aligned).is_empty():
        return False
    for va in a.corrections:
        for wb in b.corrections:
            if pair(va, wb):
                return False
    rho = [aug.row for aug in model.v_augs]
    sigma = [aug.row for aug in model.w_augs]
    # corrections of a against the aligned part of b, and symmetrically;
    # the pairing against e_i / f_j is eventually periodic in the index
    for va in a.corrections:
        window = stabilization_window([b.aligned] + rho + [va.support_bound()])
        for j in b.aligned.members_below(window[0] + window[1]):
            val = va.basis.get(j, 0)
            for u, r in zip(va.augs, rho):
                val += u * r.value(j)
            if val:
                return False
    for wb in b.corrections:
        window = stabilization_window([a.aligned] + sigma + [wb.support_bound()])
        for i in a.aligned.members_below(window[0] + window[1]):
            val = wb.basis.get(i, 0)
            for d, r in zip(wb.augs, sigma):
                val += d * r.value(i)
            if val:
                return False
    return True


class TautCouple:
    """Validated taut couple of semiclosed flags in V and V*."""

    __slots__ = ("f_flag", "g_flag", "c_pairs", "_collapsed")

    def __init__(self, f_flag, g_flag, c_pairs):
        self.f_flag = f_flag
        self.g_flag = g_flag
        self.c_pairs = c_pairs
        self._collapsed = None

    @property
    def model(self):
        return self.f_flag.model

    def f_pair(self, i):
        return self.f_flag.chain[i], self.f_flag.chain[i + 1]

    def g_pair(self, j):
        return self.g_flag.chain[j], self.g_flag.chain[j + 1]

    def infinite_c_pairs(self):
        return [
            (fi, gj)
            for fi, gj in self.c_pairs
            if quotient_dim(*self.f_pair(fi)) == math.inf
        ]

    def __repr__(self):
        return (
            f"TautCouple({self.f_flag.n_pairs()} x {self.g_flag.n_pairs()} pairs, "
            f"C of size {len(self.c_pairs)})"
        )


def make_taut_couple(f: FinitePairFlag, g: FinitePairFlag) -> TautCouple:
    """Validate tautness and compute the matched closed-predecessor pairs."""
    if f.side != SIDE_V or g.side != SIDE_W:
        raise SideMismatch("taut couple wants flags in V and V*")
    if f.model != g.model:
        raise ModelMismatch("flags from different models")
    for flag in (f, g):
        if not classify_flag(flag).semiclosed:
            raise NotSemiclosed(f"{flag!r} is not semiclosed")
    model = f.model
    zero_w, full_w = Subspace.zero(model, SIDE_W), Subspace.full(model, SIDE_W)
    zero_v, full_v = Subspace.zero(model, SIDE_V), Subspace.full(model, SIDE_V)
    f_perps = {s: perp(s) for s in f.chain}
    g_perps = {s: perp(s) for s in g.chain}
    for s in f.chain:
        p = f_perps[s]
        if p not in (zero_w, full_w) and p not in g.chain:
            raise NotTaut(s)
    for s in g.chain:
        p = g_perps[s]
        if p not in (zero_v, full_v) and p not in f.chain:
            raise NotTaut(s)

    c_pairs = []
    g_index = {s: j for j, s in enumerate(g.chain)}
    for i in range(f.n_pairs()):
        pred, succ = f.chain[i], f.chain[i + 1]
        if closure(pred) != pred:
            continue
        gp = f_perps[succ]
        j = g_index.get(gp)
        if j is None or j >= g.n_pairs():
            raise NotTaut(succ)
        if g_perps[g.chain[j + 1]] != pred:
            raise NotTaut(succ)
        c_pairs.append((i, j))
    # the matching must exhaust the closed-predecessor pairs of g
    matched = {j for _, j in c_pairs}
    for j in range(g.n_pairs()):
        if closure(g.chain[j]) == g.chain[j] and j not in matched:
            raise NotTaut(g.chain[j])
    if len(matched) != len(c_pairs):
        raise NotTaut(f.chain[0])
    return TautCouple(f, g, tuple(c_pairs))


def pair_order(t: TautCouple, alpha: int, beta: int) -> bool:
    """Whether alpha < beta, for alpha an f-pair index and beta a g-pair index."""
    f_succ = t.f_flag.chain[alpha + 1]
    g_succ = t.g_flag.chain[beta + 1]
    return pairing_is_zero(f_succ, g_succ)


def pair_leq(t: TautCouple, alpha: int, beta: int) -> bool:
    return (alpha, beta) in t.c_pairs or pair_order(t, alpha, beta)


def fc_flag(f: FinitePairFlag) -> FinitePairFlag:
    """Collapse every dense pair: non-closed members drop out, leaving the
    maximal closed flag inside f."""
    closures = {s: closure(s) for s in f.chain}
    kept = []
    for idx, s in enumerate(f.chain):
        if closures[s] == s:
            kept.append(s)
        else:
            if idx + 1 >= len(f.chain) or closures[s] != f.chain[idx + 1]:
                raise NotSemiclosed("non-closed member whose closure is not its successor")
    return FinitePairFlag(f.model, f.side, tuple(kept))


def collapsed_couple(t: TautCouple) -> TautCouple:
    """The taut couple of the collapsed flags, cached on the couple."""
    if t._collapsed is None:
        t._collapsed = make_taut_couple(fc_flag(t.f_flag), fc_flag(t.g_flag))
    return t._collapsed


@dataclass
class SelfTautReport:
    self_taut: bool
    tags: tuple  # per chain member: "isotropic" | "coisotropic" | "both"
    iso_bijection: tuple  # (isotropic pair idx, coisotropic pair idx) matches


def self_taut_and_iso(f: FinitePairFlag) -> SelfTautReport:
    """Self-tautness and the isotropic/coisotropic structure under the form."""
    model = f.model
    if model.form_kind == "none":
        from .pairedspace import NoFormOnModel

        raise NoFormOnModel("self-tautness needs a form on the model")
    perps = {s: form_perp(s) for s in f.chain}
    self_taut = True
    for s in f.chain:
        p = perps[s]
        if not p.is_zero() and not p.is_full() and p not in f.chain:
            self_taut = False
    tags = []
    for s in f.chain:
        p = perps[s]
        iso = p.contains(s)
        coiso = s.contains(p)
        tags.append("both" if iso and coiso else "isotropic" if iso else
                    "coisotropic" if coiso else "neither")
    bijection = []
    if self_taut:
        closures = {s: closure(s) for s in f.chain}
        iso_domain = [
            i
            for i in range(f.n_pairs())
            if closures[f.chain[i]] == f.chain[i]
            and perps[f.chain[i + 1]].contains(f.chain[i + 1])
        ]
        codomain = [
            i
            for i in range(f.n_pairs())
            if closures[f.chain[i]] == f.chain[i]
            and f.chain[i].contains(perps[f.chain[i]])
        ]
        index = {s: i for i, s in enumerate(f.chain)}
        for i in iso_domain:
            target = perps[f.chain[i + 1]]
            j = index.get(target)
            if j is None or j >= f.n_pairs():
                raise NotTaut(f.chain[i + 1])
            bijection.append((i, j))
        if sorted(j for _, j in bijection) != sorted(codomain):
            raise NotTaut(f.chain[0])
    return SelfTautReport(self_taut, tuple(tags), tuple(bijection))


def refine_pair(f: FinitePairFlag, pair_idx: int, mid: Subspace) -> FinitePairFlag:
    """Insert an intermediate subspace into one pair, keeping semiclosedness.

    Supported refinements: a closed subspace strictly inside a pair with
    finite-dimensional quotient, or a basis-aligned split of an infinite
    aligned quotient."""
    pred, succ = f.chain[pair_idx], f.chain[pair_idx + 1]
    if not (succ.contains(mid) and mid.contains(pred)) or mid in (pred, succ):
        raise ValueError("refinement must lie strictly between the pair")
    chain = f.chain[: pair_idx + 1] + (mid,) + f.chain[pair_idx + 1 :]
    refined = FinitePairFlag(f.model, f.side, chain)
    if not classify_flag(refined).semiclosed:
        raise NotSemiclosed("refinement breaks semiclosedness")
    return refined


# ---------------------------------------------------------------------------
# basis-order flags: maximal closed flags compatible with the standard basis
# ---------------------------------------------------------------------------


FINITE = "finite"
OMEGA_UP = "omega_up"
OMEGA_DOWN = "omega_down"


@dataclass(frozen=True)
class Block:
    kind: str
    points: tuple = ()  # for finite blocks: tuple of index tuples
    indices: EpSet = None  # for omega blocks

    def index_set(self) -> EpSet:
        if self.kind == FINITE:
            return EpSet.finite({i for pt in self.points for i in pt})
        return self.indices


class BasisOrderFlag:
    """Ordered blocks partitioning the basis index set of a pure-basis model."""

    __slots__ = ("model", "blocks")

    def __init__(self, model, blocks: tuple[Block, ...]):
        if model.v_augs or model.w_augs:
            raise ValueError("basis-order flags need a pure-basis model")
        union = EpSet.empty()
        for b in blocks:
            s = b.index_set()
            if b.kind in (OMEGA_UP, OMEGA_DOWN) and s.is_finite():
                raise ValueError("omega blocks must have infinitely many indices")
            if not union.intersection(s).is_empty():
                raise ValueError("blocks overlap")
            union = union.union(s)
        if union != EpSet.naturals():
            raise ValueError("blocks must partition the index set")
        self.model = model
        self.blocks = blocks

    def position(self, i: int):
        for b_idx, b in enumerate(self.blocks):
            if b.kind == FINITE:
                for p_idx, pt in enumerate(b.points):
                    if i in pt:
                        return (b_idx, p_idx)
            elif b.indices.member(i):
                rank = i if b.kind == OMEGA_UP else -i
                return (b_idx, rank)
        raise ValueError(f"index {i} not placed")

    def leq(self, i: int, j: int) -> bool:
        return self.position(i) <= self.position(j)

    def less(self, i: int, j: int) -> bool:
        return self.position(i) < self.position(j)

    def is_maximal_closed(self) -> bool:
        return all(
            len(pt) == 1
            for b in self.blocks
            if b.kind == FINITE
            for pt in b.points
        )


@dataclass
class BasisFlagQueries:
    is_maximal_closed: bool
    comparator: object


def basis_flag_queries(b: BasisOrderFlag) -> BasisFlagQueries:
    return BasisFlagQueries(b.is_maximal_closed(), b.leq)
