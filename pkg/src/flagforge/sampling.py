"""Seeded random generators for subspace vectors and stabilizer elements.

Used by the truncation-coherence checks and by the test batteries.  All
randomness flows through an explicit random.Random instance, so results are
reproducible from a seed.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .finitary import FinitaryElement
from .genflag import TautCouple, pair_leq, pair_order, quotient_dim
from .pairedspace import SIDE_V, SIDE_W, Subspace, Vector

F = Fraction


def random_vector_in(sub: Subspace, rng, bound: int = 10) -> Vector:
    """Random element of the subspace: aligned sample plus corrections."""
    v = Vector.zero(sub.model, sub.side)
    for i in sub.aligned.members_below(bound):
        if rng.random() < 0.35:
            v = v.add(
                Vector.basis_vector(sub.model, sub.side, i).scale(
                    rng.randrange(-2, 3) or 1
                )
            )
    for c in sub.corrections:
        if rng.random() < 0.5:
            v = v.add(c.scale(rng.randrange(-2, 3) or 1))
    if v.is_zero() and not sub.is_zero():
        i = sub.aligned.min_member()
        if i is not None:
            v = Vector.basis_vector(sub.model, sub.side, i)
        elif sub.corrections:
            v = sub.corrections[0]
    return v


def sample_pplus(t: TautCouple, rng, terms: int = 2) -> FinitaryElement:
    """Random joint-stabilizer element built from its tensor description."""
    placements = [
        (a, b)
        for a in range(t.f_flag.n_pairs())
        for b in range(t.g_flag.n_pairs())
        if pair_leq(t, a, b)
    ]
    out = FinitaryElement.zero(t.model)
    for _ in range(terms):
        a, b = rng.choice(placements)
        v = random_vector_in(t.f_flag.chain[a + 1], rng)
        w = random_vector_in(t.g_flag.chain[b + 1], rng)
        if not v.is_zero() and not w.is_zero():
            out = out.add(FinitaryElement.rank_one(v, w))
    return out


def sample_nilradical(t: TautCouple, rng, terms: int = 2) -> FinitaryElement:
    """Random nilradical element: strictly placed tensors."""
    placements = [
        (a, b)
        for a in range(t.f_flag.n_pairs())
        for b in range(t.g_flag.n_pairs())
        if pair_order(t, a, b)
    ]
    out = FinitaryElement.zero(t.model)
    if not placements:
        return out
    for _ in range(terms):
        a, b = rng.choice(placements)
        v = random_vector_in(t.f_flag.chain[a + 1], rng)
        w = random_vector_in(t.g_flag.chain[b + 1], rng)
        if not v.is_zero() and not w.is_zero():
            out = out.add(FinitaryElement.rank_one(v, w))
    return out


def diagonal_units(t: TautCouple, gamma: int, want: int = 2, bound: int = 60):
    """Rank-one e_i (x) f_i units with block trace 1 in the gamma-th block."""
    fi, gj = t.c_pairs[gamma]
    f_pred, f_succ = t.f_pair(fi)
    g_pred, g_succ = t.g_pair(gj)
    found = []
    for i in range(bound):
        ei = Vector.basis_vector(t.model, SIDE_V, i)
        fj = Vector.basis_vector(t.model, SIDE_W, i)
        if (
            f_succ.member(ei)
            and not f_pred.member(ei)
            and g_succ.member(fj)
            and not g_pred.member(fj)
        ):
            found.append(FinitaryElement.rank_one(ei, fj))
            if len(found) == want:
                break
    return found


def sample_pminus(t: TautCouple, rng, ambient: str = "gl", terms: int = 2):
    """Random minus-subalgebra element: nilradical part plus block-traceless
    diagonal parts (finite blocks unrestricted for ambient gl)."""
    out = sample_nilradical(t, rng, terms)
    for gamma, (fi, _) in enumerate(t.c_pairs):
        if rng.random() < 0.6:
            continue
        units = diagonal_units(t, gamma)
        if not units:
            continue
        infinite = quotient_dim(*t.f_pair(fi)) == math.inf
        if infinite or ambient == "sl":
            if len(units) == 2:
                out = out.add(units[0].sub(units[1]))
        else:
            out = out.add(units[0].scale(rng.randrange(1, 3)))
    return out


def random_element(model, rng, terms: int = 2, bound: int = 8) -> FinitaryElement:
    """Unconstrained random finite-rank element."""
    out = FinitaryElement.zero(model)
    for _ in range(terms):
        v = Vector(
            model,
            SIDE_V,
            {rng.randrange(bound): F(rng.randrange(-2, 3) or 1) for _ in range(2)},
        )
        w = Vector(
            model,
            SIDE_W,
            {rng.randrange(bound): F(rng.randrange(-2, 3) or 1) for _ in range(2)},
        )
        out = out.add(FinitaryElement.rank_one(v, w))
    return out
