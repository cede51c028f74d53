"""JSON encoding and decoding for every value the CLI can name.

Rationals serialize as strings "p/q" (just "p" when the denominator is 1).
All index I/O is 0-based.  Decoding validates shapes and raises ValueError
with a readable message on malformed input.
"""

from __future__ import annotations

from fractions import Fraction

from .epcore import EpSeq, EpSet
from .exactnum import Matrix, format_rational, rat
from .finitary import FinitaryElement, TraceConditionSubalgebra
from .finoracle import FdLieAlgebra
from .genflag import (
    FINITE,
    OMEGA_DOWN,
    OMEGA_UP,
    BasisOrderFlag,
    Block,
    FinitePairFlag,
    TautCouple,
    make_taut_couple,
)
from .pairedspace import (
    Augmentation,
    IotaPiece,
    PairedSpaceModel,
    Subspace,
    Vector,
)


def rational_to_json(x: Fraction) -> str:
    return format_rational(x)


def rational_from_json(s) -> Fraction:
    if isinstance(s, bool):
        raise ValueError("expected a rational, got a boolean")
    if isinstance(s, (int, str)):
        return rat(s if isinstance(s, str) else int(s))
    raise ValueError(f"expected a rational string, got {s!r}")


def epset_to_json(s: EpSet) -> dict:
    return {
        "threshold": s.threshold,
        "period": s.period,
        "pre": sorted(s.pre),
        "residues": sorted(s.residues),
    }


def epset_from_json(d: dict) -> EpSet:
    return EpSet.make(
        d.get("threshold", 0),
        d.get("period", 1),
        d.get("pre", ()),
        d.get("residues", ()),
    )


def epseq_to_json(s: EpSeq) -> dict:
    return {
        "pre": [rational_to_json(v) for v in s.pre],
        "repeat": [rational_to_json(v) for v in s.repeat],
    }


def epseq_from_json(d: dict) -> EpSeq:
    return EpSeq.make(
        [rational_from_json(v) for v in d.get("pre", [])],
        [rational_from_json(v) for v in d.get("repeat", [1])],
    )


def model_to_json(m: PairedSpaceModel) -> dict:
    out = {
        "v_augs": [epseq_to_json(a.row) for a in m.v_augs],
        "w_augs": [epseq_to_json(a.row) for a in m.w_augs],
        "cross": [[rational_to_json(v) for v in row] for row in m.cross],
        "form_kind": m.form_kind,
    }
    if m.form_kind != "none":
        out["iota"] = [
            {"indices": epset_to_json(p.indices), "offset": p.offset} for p in m.iota
        ]
    return out


def model_from_json(d: dict) -> PairedSpaceModel:
    v_augs = tuple(Augmentation(epseq_from_json(a)) for a in d.get("v_augs", []))
    w_augs = tuple(Augmentation(epseq_from_json(a)) for a in d.get("w_augs", []))
    cross = tuple(
        tuple(rational_from_json(v) for v in row) for row in d.get("cross", [])
    )
    if not cross and v_augs:
        cross = tuple(tuple() for _ in v_augs)
    iota = tuple(
        IotaPiece(epset_from_json(p["indices"]), int(p["offset"]))
        for p in d.get("iota", [])
    )
    return PairedSpaceModel(
        v_augs=v_augs,
        w_augs=w_augs,
        cross=cross,
        form_kind=d.get("form_kind", "none"),
        iota=iota,
    )


def vector_to_json(v: Vector) -> dict:
    return {
        "side": v.side,
        "basis": {str(i): rational_to_json(c) for i, c in sorted(v.basis.items())},
        "augs": [rational_to_json(c) for c in v.augs],
    }


def vector_from_json(model, d: dict) -> Vector:
    return Vector(
        model,
        d["side"],
        {int(i): rational_from_json(c) for i, c in d.get("basis", {}).items()},
        tuple(rational_from_json(c) for c in d.get("augs", [])),
    )


def subspace_to_json(s: Subspace) -> dict:
    return {
        "side": s.side,
        "aligned": epset_to_json(s.aligned),
        "corrections": [vector_to_json(c) for c in s.corrections],
    }


def subspace_from_json(model, d: dict) -> Subspace:
    side = d["side"]
    gens = [vector_from_json(model, c) for c in d.get("corrections", [])]
    return Subspace.span(model, side, epset_from_json(d.get("aligned", {})), gens)


def flag_to_json(f: FinitePairFlag) -> dict:
    return {
        "side": f.side,
        "chain": [subspace_to_json(s) for s in f.chain],
    }


def flag_from_json(model, d: dict) -> FinitePairFlag:
    from .genflag import flag_from_chain

    side = d["side"]
    chain = [subspace_from_json(model, s) for s in d.get("chain", [])]
    return flag_from_chain(model, side, chain)


def basis_flag_to_json(b: BasisOrderFlag) -> dict:
    blocks = []
    for blk in b.blocks:
        if blk.kind == FINITE:
            blocks.append({"kind": FINITE, "points": [list(pt) for pt in blk.points]})
        else:
            blocks.append({"kind": blk.kind, "indices": epset_to_json(blk.indices)})
    return {"blocks": blocks}


def basis_flag_from_json(model, d: dict) -> BasisOrderFlag:
    blocks = []
    for blk in d.get("blocks", []):
        kind = blk["kind"]
        if kind == FINITE:
            blocks.append(
                Block(FINITE, points=tuple(tuple(pt) for pt in blk["points"]))
            )
        elif kind in (OMEGA_UP, OMEGA_DOWN):
            blocks.append(Block(kind, indices=epset_from_json(blk["indices"])))
        else:
            raise ValueError(f"unknown block kind {kind!r}")
    return BasisOrderFlag(model, tuple(blocks))


def couple_to_json(t: TautCouple) -> dict:
    return {"f": flag_to_json(t.f_flag), "g": flag_to_json(t.g_flag)}


def couple_from_json(model, d: dict) -> TautCouple:
    return make_taut_couple(
        flag_from_json(model, d["f"]), flag_from_json(model, d["g"])
    )


def element_to_json(x: FinitaryElement) -> dict:
    return {
        "terms": [[vector_to_json(v), vector_to_json(w)] for v, w in x.terms]
    }


def element_from_json(model, d: dict) -> FinitaryElement:
    terms = [
        (vector_from_json(model, v), vector_from_json(model, w))
        for v, w in d.get("terms", [])
    ]
    return FinitaryElement(model, terms)


def matrix_to_json(m: Matrix) -> list:
    return [[rational_to_json(v) for v in row] for row in m.entries]


def matrix_from_json(rows) -> Matrix:
    return Matrix([[rational_from_json(v) for v in row] for row in rows])


def algebra_to_json(g: FdLieAlgebra) -> dict:
    return {"n": g.n, "basis": [matrix_to_json(b) for b in g.basis]}


def algebra_from_json(d: dict) -> FdLieAlgebra:
    return FdLieAlgebra(int(d["n"]), [matrix_from_json(b) for b in d.get("basis", [])])


def tc_to_json(s: TraceConditionSubalgebra) -> dict:
    return {
        "ambient": s.ambient,
        "constraints": [[rational_to_json(v) for v in row] for row in s.constraints],
    }


def tc_from_json(couple, d: dict) -> TraceConditionSubalgebra:
    return TraceConditionSubalgebra(
        couple,
        d.get("ambient", "gl"),
        [[rational_from_json(v) for v in row] for row in d.get("constraints", [])],
    )
