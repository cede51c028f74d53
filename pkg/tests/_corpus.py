"""Shared builders for the test suite: models, flags, couples, random data."""

import random
from fractions import Fraction

from flagforge.epcore import EpSet
from flagforge.genflag import flag_from_chain, make_taut_couple
from flagforge.pairedspace import (
    SIDE_V,
    SIDE_W,
    Subspace,
    dense_line_model,
    plain_model,
)
from flagforge.sampling import (  # noqa: F401  (re-exported for tests)
    random_element,
    random_vector_in,
    sample_nilradical,
    sample_pminus,
    sample_pplus,
)

F = Fraction
EVENS = EpSet.from_residues(2, (0,))
ODDS = EpSet.from_residues(2, (1,))


def evens_couple(model=None):
    m = model or plain_model()
    f = flag_from_chain(m, SIDE_V, [Subspace.span(m, SIDE_V, EVENS)])
    g = flag_from_chain(m, SIDE_W, [Subspace.span(m, SIDE_W, ODDS)])
    return make_taut_couple(f, g)


def trivial_couple(model=None):
    m = model or plain_model()
    return make_taut_couple(
        flag_from_chain(m, SIDE_V, []), flag_from_chain(m, SIDE_W, [])
    )


def augmented_couple():
    """The dense-subspace flag 0 < V < V-extended with the trivial partner."""
    m = dense_line_model()
    v_std = Subspace.span(m, SIDE_V, EpSet.naturals())
    f = flag_from_chain(m, SIDE_V, [v_std])
    g = flag_from_chain(m, SIDE_W, [])
    return make_taut_couple(f, g)


def random_ep_model(rng: random.Random):
    """A plain model or a small augmented variant, randomly."""
    from flagforge.epcore import EpSeq
    from flagforge.pairedspace import Augmentation, PairedSpaceModel, validate_model

    roll = rng.random()
    if roll < 0.5:
        return plain_model()
    if roll < 0.8:
        return dense_line_model()
    row = EpSeq.make(
        [rng.randrange(-1, 2) for _ in range(rng.randrange(2))],
        [rng.randrange(-1, 2) for _ in range(rng.randrange(1, 3))],
    )
    if row.is_zero():
        return plain_model()
    model = PairedSpaceModel(v_augs=(Augmentation(row),), cross=((),))
    try:
        validate_model(model)
    except Exception:
        return plain_model()
    return model


def random_basis_subspaces(m, rng, side=SIDE_V, max_len=3):
    """A random strictly increasing chain of aligned subspaces."""
    period = rng.choice([2, 3, 4])
    chain = []
    residues = set()
    current = None
    for r in rng.sample(range(period), k=min(max_len, period)):
        residues.add(r)
        cand = Subspace.span(m, side, EpSet.from_residues(period, residues))
        if current is None or (cand.contains(current) and cand != current):
            chain.append(cand)
            current = cand
    return chain


def random_plain_couple(rng):
    """Random taut couple in the plain model from an aligned chain and perps."""
    from flagforge.pairedspace import perp

    m = plain_model()
    chain = random_basis_subspaces(m, rng)
    f = flag_from_chain(m, SIDE_V, chain)
    g = flag_from_chain(m, SIDE_W, [perp(s) for s in f.chain])
    return make_taut_couple(f, g)
