"""Finite-dimensional exact structure theory over Q.

This is the independent oracle: everything here works with explicit n x n
rational matrices and ordinary linear algebra, with no reference to the
countable model.  It provides solvable radicals, linear nilradicals, Levi
components, locally reductive parts, Cartan-subalgebra tests, invariant
taut couples from composition series, and parabolic checks at desk scale.

Randomized searches (the meataxe, torus extension, maximality probes) take
an explicit seed; given the seed everything is deterministic.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

import sympy

from .exactnum import (
    Matrix,
    charpoly,
    in_row_space,
    is_nilpotent,
    jordan_chevalley,
    kernel,
    minpoly,
    poly_eval_matrix,
    poly_is_squarefree,
    row_space_basis,
    solve,
    trace_of_product,
)

QZERO = Fraction(0)


class NotSplittable(ValueError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__("subalgebra is not closed under Jordan components")


class NotParabolicInput(ValueError):
    pass


class CertificationFailed(RuntimeError):
    """The Las Vegas irreducibility search ran out of restarts."""


# ---------------------------------------------------------------------------
# spans of matrices
# ---------------------------------------------------------------------------


class MatSpan:
    """Subspace of n x n matrices, stored as RREF rows of flattened entries."""

    __slots__ = ("n", "rows")

    def __init__(self, n: int, rows=()):
        self.n = n
        self.rows = row_space_basis([list(r) for r in rows], n * n)

    @staticmethod
    def from_matrices(n: int, mats) -> "MatSpan":
        return MatSpan(n, [m.flatten() for m in mats])

    @property
    def dim(self) -> int:
        return len(self.rows)

    def member(self, m: Matrix) -> bool:
        return in_row_space(m.flatten(), self.rows)

    def contains(self, other: "MatSpan") -> bool:
        return all(in_row_space(r, self.rows) for r in other.rows)

    def __eq__(self, other):
        return isinstance(other, MatSpan) and self.n == other.n and self.rows == other.rows

    def __hash__(self):
        return hash((self.n, tuple(tuple(r) for r in self.rows)))

    def matrices(self) -> list[Matrix]:
        return [unflatten(r, self.n) for r in self.rows]

    def sum(self, other: "MatSpan") -> "MatSpan":
        return MatSpan(self.n, self.rows + other.rows)

    def intersect(self, other: "MatSpan") -> "MatSpan":
        if not self.rows or not other.rows:
            return MatSpan(self.n)
        cols = [
            [r[k] for r in self.rows] + [-r[k] for r in other.rows]
            for k in range(self.n * self.n)
        ]
        mixed = kernel(Matrix(cols))
        out = []
        for lam in mixed:
            vec = [QZERO] * (self.n * self.n)
            for c, r in zip(lam[: len(self.rows)], self.rows):
                if c:
                    vec = [a + c * b for a, b in zip(vec, r)]
            out.append(vec)
        return MatSpan(self.n, out)

    def coords_of(self, m: Matrix):
        """Coefficients over the RREF row basis, or None.

        RREF pivots are 1 and cleared from the other rows, so the coordinates
        can be read off directly at the pivot columns."""
        v = m.flatten()
        coords = []
        for row in self.rows:
            p = next(j for j, w in enumerate(row) if w)
            c = v[p]
            coords.append(c)
            if c:
                v = [a - c * b for a, b in zip(v, row)]
        if any(v):
            return None
        return coords


def unflatten(row, n: int) -> Matrix:
    return Matrix([[row[i * n + j] for j in range(n)] for i in range(n)])


def bracket(a: Matrix, b: Matrix) -> Matrix:
    return a * b - b * a


def bracket_span(a: MatSpan, b: MatSpan) -> MatSpan:
    mats = []
    for x in a.matrices():
        for y in b.matrices():
            mats.append(bracket(x, y))
    return MatSpan.from_matrices(a.n, mats)


def derived_series(s: MatSpan) -> list[MatSpan]:
    series = [s]
    while series[-1].dim:
        nxt = bracket_span(series[-1], series[-1])
        if nxt.dim == series[-1].dim:
            break
        series.append(nxt)
    return series


def is_solvable_span(s: MatSpan) -> bool:
    return derived_series(s)[-1].dim == 0


def lower_central_series(s: MatSpan) -> list[MatSpan]:
    series = [s]
    while series[-1].dim:
        nxt = bracket_span(s, series[-1])
        if nxt.dim == series[-1].dim:
            break
        series.append(nxt)
    return series


def is_nilpotent_span(s: MatSpan) -> bool:
    return lower_central_series(s)[-1].dim == 0


class FdLieAlgebra:
    """Matrix Lie algebra: an ambient size and a bracket-closed basis."""

    __slots__ = ("n", "basis", "span", "_ad", "_killing")

    def __init__(self, n: int, basis):
        self.n = n
        gens = [Matrix(b.entries) if isinstance(b, Matrix) else Matrix(b) for b in basis]
        self.span = MatSpan.from_matrices(n, gens)
        # canonical basis = RREF span matrices, so coordinate vectors from
        # span.coords_of always agree with basis indexing
        self.basis = self.span.matrices()
        for a, b in itertools.combinations(self.basis, 2):
            if not self.span.member(bracket(a, b)):
                raise ValueError("basis is not closed under the bracket")
        self._ad = None
        self._killing = None

    @property
    def dim(self) -> int:
        return len(self.basis)

    def member(self, m: Matrix) -> bool:
        return self.span.member(m)

    def ad_matrices(self) -> list[Matrix]:
        if self._ad is None:
            d = self.dim
            cols_per = []
            for x in self.basis:
                cols = []
                for y in self.basis:
                    c = self.span.coords_of(bracket(x, y))
                    cols.append(c)
                cols_per.append(
                    Matrix.from_rows(list(map(list, zip(*cols)))) if d else Matrix([])
                )
            self._ad = cols_per
        return self._ad

    def killing(self) -> Matrix:
        if self._killing is None:
            ads = self.ad_matrices()
            d = self.dim
            k = [[QZERO] * d for _ in range(d)]
            for i in range(d):
                for j in range(i, d):
                    val = trace_of_product(ads[i], ads[j]) if d else QZERO
                    k[i][j] = val
                    k[j][i] = val
            self._killing = Matrix(k)
        return self._killing

    def subspan(self, mats) -> MatSpan:
        s = MatSpan.from_matrices(self.n, mats)
        if not self.span.contains(s):
            raise ValueError("matrices are not inside the algebra")
        return s

    def __repr__(self):
        return f"FdLieAlgebra(n={self.n}, dim={self.dim})"


def lie_close(n: int, gens) -> FdLieAlgebra:
    """Smallest bracket-closed subspace containing the generators."""
    span = MatSpan.from_matrices(n, list(gens))
    while True:
        mats = span.matrices()
        new = MatSpan(
            n,
            span.rows
            + [bracket(a, b).flatten() for a, b in itertools.combinations(mats, 2)],
        )
        if new.dim == span.dim:
            return FdLieAlgebra(n, span.matrices())
        span = new


# ---------------------------------------------------------------------------
# radical and linear nilradical
# ---------------------------------------------------------------------------


def solvable_radical(g: FdLieAlgebra) -> MatSpan:
    """Killing-perp of the derived subalgebra (exact, char 0), verified
    solvable by its derived series."""
    d = g.dim
    if d == 0:
        return MatSpan(g.n)
    dg = bracket_span(g.span, g.span)
    kill = g.killing()
    rows = []
    for m in dg.matrices():
        mu = g.span.coords_of(m)
        rows.append([
            sum((kill.entries[i][j] * mu[j] for j in range(d)), QZERO)
            for i in range(d)
        ])
    if not rows:
        rows = [[QZERO] * d]
    coeff_kernel = kernel(Matrix(rows))
    mats = []
    for lam in coeff_kernel:
        acc = Matrix.zero(g.n, g.n)
        for c, b in zip(lam, g.basis):
            if c:
                acc = acc + b.scale(c)
        mats.append(acc)
    rad = MatSpan.from_matrices(g.n, mats)
    assert is_solvable_span(rad), "Killing-perp radical failed the solvability check"
    return rad


def linear_nilradical(g: FdLieAlgebra, seed: int = 0) -> MatSpan:
    """Matrix-nilpotent part of the solvable radical.

    The radical is triangularized over Q by a composition series of its
    natural module (irreducible quotients force semisimple generators to act
    through a field, so nilpotence becomes the linear condition of moving
    each chain step into the previous one).  Every output basis element is
    verified nilpotent and the span is verified to be an ideal.
    """
    rad = solvable_radical(g)
    if rad.dim == 0:
        return rad
    actions = rad.matrices()
    chain = composition_series(actions, g.n, random.Random(seed))
    # chain: increasing list of RREF row bases ending at the full space
    rows = []
    prev: list = []
    for level in chain:
        for w in level:
            if in_row_space(w, prev):
                continue
            resids = []
            for a in actions:
                img = [
                    sum((a.entries[i][c] * w[c] for c in range(g.n)), QZERO)
                    for i in range(g.n)
                ]
                resids.append(_reduce_vector(img, prev))
            for r in range(g.n):
                rows.append([res[r] for res in resids])
        prev = level
    coeffs = kernel(Matrix(rows)) if rows else []
    mats = []
    for lam in coeffs:
        acc = Matrix.zero(g.n, g.n)
        for c, b in zip(lam, actions):
            if c:
                acc = acc + b.scale(c)
        mats.append(acc)
    nil = MatSpan.from_matrices(g.n, mats)
    for m in nil.matrices():
        assert is_nilpotent(m), "nilradical candidate is not nilpotent"
    for b in g.basis:
        for m in nil.matrices():
            assert nil.member(bracket(b, m)), "nilradical is not an ideal"
    return nil


def _reduce_vector(vec, rows):
    v = list(vec)
    for r in rows:
        p = next((j for j, w in enumerate(r) if w), None)
        if p is not None and v[p]:
            c = v[p] / r[p]
            v = [a - c * w for a, w in zip(v, r)]
    return v


# ---------------------------------------------------------------------------
# meataxe: submodules, irreducibility, composition series
# ---------------------------------------------------------------------------


def spin(vectors, actions, dim) -> list:
    """RREF basis of the smallest subspace containing vectors and closed
    under the action matrices."""
    rows = row_space_basis([list(v) for v in vectors], dim)
    queue = list(rows)
    while queue:
        v = queue.pop()
        for a in actions:
            img = [
                sum((a.entries[i][c] * v[c] for c in range(dim)), QZERO)
                for i in range(dim)
            ]
            if not in_row_space(img, rows):
                rows = row_space_basis(rows + [img], dim)
                queue.append(img)
    return rows


def _theta_battery(actions, rng, dim, rounds):
    mats = [a for a in actions if not a.is_zero()]
    for a in mats:
        yield a
    for _ in range(rounds):
        if not mats:
            return
        combo = Matrix.zero(dim, dim)
        for a in mats:
            c = rng.randrange(-2, 3)
            if c:
                combo = combo + a.scale(c)
        if rng.random() < 0.5 and len(mats) >= 2:
            combo = combo + rng.choice(mats) * rng.choice(mats)
        if not combo.is_zero():
            yield combo


def _min_poly_factors(theta: Matrix):
    coeffs = minpoly(theta)
    x = sympy.Symbol("x")
    poly = sympy.Poly([sympy.Rational(c) for c in reversed(coeffs)], x, domain="QQ")
    out = []
    for factor, mult in poly.factor_list()[1]:
        cs = [Fraction(str(c)) for c in reversed(factor.all_coeffs())]
        out.append((cs, mult))
    return out


def find_proper_submodule(actions, dim, rng, rounds: int = 30):
    """A proper nonzero submodule as RREF rows, or None if the module is
    certified irreducible (Norton's test on a nullity-one factor)."""
    if dim <= 1:
        return None
    if all(a.is_zero() for a in actions):
        return row_space_basis([[QZERO] * 0 + [Fraction(1)] + [QZERO] * (dim - 1)], dim)
    transposed = [a.transpose() for a in actions]
    for theta in _theta_battery(actions, rng, dim, rounds):
        nullity_one = None
        for p, _ in _min_poly_factors(theta):
            null = kernel(poly_eval_matrix(p, theta))
            for w in null:
                sub = spin([w], actions, dim)
                if 0 < len(sub) < dim:
                    return sub
            if len(null) == len(p) - 1:
                nullity_one = (p, null)
        if nullity_one is not None:
            p, null = nullity_one
            dual_null = kernel(poly_eval_matrix(p, theta.transpose()))
            dual_sub = spin([dual_null[0]], transposed, dim)
            if len(dual_sub) < dim:
                ann = kernel(Matrix(dual_sub))
                ann_rows = row_space_basis([list(v) for v in ann], dim)
                if 0 < len(ann_rows) < dim:
                    return ann_rows
                raise AssertionError("dual spin produced a trivial annihilator")
            return None
    raise CertificationFailed(
        "no nullity-one element found; increase rounds or change the seed"
    )


def composition_series(actions, dim, rng) -> list:
    """Increasing chain of RREF row bases 0 < W_1 < ... < W_s = full space
    with irreducible quotients (the zero step is omitted)."""
    if dim == 0:
        return []
    sub = find_proper_submodule(actions, dim, rng)
    if sub is None:
        return [_identity_rows(dim)]
    k = len(sub)
    sub_actions = _restrict_actions(actions, sub, dim)
    quo_actions, lift = _quotient_actions(actions, sub, dim)
    lower = composition_series(sub_actions, k, rng)
    upper = composition_series(quo_actions, dim - k, rng)
    chain = []
    for level in lower:
        chain.append(row_space_basis([_combine(sub, r) for r in level], dim))
    for level in upper:
        rows = [lift(r) for r in level]
        chain.append(row_space_basis([list(s) for s in sub] + rows, dim))
    return chain


def _identity_rows(dim):
    return [
        [Fraction(1) if j == i else QZERO for j in range(dim)] for i in range(dim)
    ]


def _combine(sub_rows, coeffs):
    out = [QZERO] * len(sub_rows[0])
    for c, r in zip(coeffs, sub_rows):
        if c:
            out = [a + c * b for a, b in zip(out, r)]
    return out


def _restrict_actions(actions, sub_rows, dim):
    k = len(sub_rows)
    basis_cols = Matrix([[sub_rows[j][i] for j in range(k)] for i in range(dim)])
    out = []
    for a in actions:
        cols = []
        for r in sub_rows:
            img = [
                sum((a.entries[i][c] * r[c] for c in range(dim)), QZERO)
                for i in range(dim)
            ]
            coords = solve(basis_cols, img)
            assert coords is not None, "submodule is not invariant"
            cols.append(coords)
        out.append(Matrix.from_rows(list(map(list, zip(*cols)))) if k else Matrix([]))
    return out


def _quotient_actions(actions, sub_rows, dim):
    pivots = []
    for r in sub_rows:
        pivots.append(next(j for j, w in enumerate(r) if w))
    free = [j for j in range(dim) if j not in pivots]

    def project(vec):
        resid = _reduce_vector(vec, sub_rows)
        return [resid[j] for j in free]

    out = []
    for a in actions:
        cols = []
        for j in free:
            img = [a.entries[i][j] for i in range(dim)]
            cols.append(project(img))
        out.append(
            Matrix.from_rows(list(map(list, zip(*cols)))) if free else Matrix([])
        )

    def lift(qvec):
        out_vec = [QZERO] * dim
        for c, j in zip(qvec, free):
            out_vec[j] = c
        return out_vec

    return out, lift


# ---------------------------------------------------------------------------
# Levi components, splittable closure, locally reductive part
# ---------------------------------------------------------------------------


def levi_component(g: FdLieAlgebra) -> FdLieAlgebra:
    """A semisimple complement of the radical, lifted along the derived
    series of the radical by solving the linear congruences level by level."""
    rad = solvable_radical(g)
    if rad.dim == g.dim:
        return FdLieAlgebra(g.n, [])
    if rad.dim == 0:
        return g
    # complement coordinates modulo the radical
    rad_coeff_rows = row_space_basis(
        [g.span.coords_of(m) for m in rad.matrices()], g.dim
    )
    pivots = {next(j for j, w in enumerate(r) if w) for r in rad_coeff_rows}
    free = [j for j in range(g.dim) if j not in pivots]
    xs = [g.basis[j] for j in free]
    m = len(xs)

    def reduce_mod_rad_coeffs(mat: Matrix):
        return _reduce_vector(g.span.coords_of(mat), rad_coeff_rows)

    c = {}
    for i in range(m):
        for j in range(i + 1, m):
            resid = reduce_mod_rad_coeffs(bracket(xs[i], xs[j]))
            c[i, j] = [resid[k] for k in free]

    series = derived_series(rad)
    series.append(MatSpan(g.n))
    for t in range(len(series) - 1):
        level, nxt = series[t], series[t + 1]
        if not level.dim:
            break
        nxt_rows = [g.span.coords_of(mat) for mat in nxt.matrices()]
        level_rows = [g.span.coords_of(mat) for mat in level.matrices()]
        # corrections only matter modulo the next derived term, so the
        # unknowns range over complement representatives of that quotient
        w_mats = []
        seen = [list(r) for r in nxt_rows]
        for mat, row in zip(level.matrices(), level_rows):
            if not in_row_space(row, row_space_basis(seen, g.dim)):
                w_mats.append(mat)
                seen.append(row)
        if not w_mats:
            break

        def quo_coords(mat: Matrix):
            resid = _reduce_vector(g.span.coords_of(mat), nxt_rows)
            co = _coords_against(resid, level_rows, nxt_rows)
            return co

        width = len(w_mats)
        dim_q = None
        eq_rows = []
        rhs = []
        bracket_cache = [
            [quo_coords(bracket(xs[i], w)) for w in w_mats] for i in range(m)
        ]
        for i in range(m):
            for j in range(i + 1, m):
                defect = bracket(xs[i], xs[j])
                for k, coeff in enumerate(c[i, j]):
                    if coeff:
                        defect = defect - xs[k].scale(coeff)
                dvec = quo_coords(defect)
                if dim_q is None:
                    dim_q = len(dvec)
                row_block = [[QZERO] * (m * width) for _ in range(dim_q)]
                for a in range(width):
                    for r in range(dim_q):
                        row_block[r][j * width + a] += bracket_cache[i][a][r]
                        row_block[r][i * width + a] -= bracket_cache[j][a][r]
                for k in range(m):
                    coeff = c[i, j][k]
                    if coeff:
                        for a in range(width):
                            base = _unit_quo(a, w_mats, quo_coords)
                            for r in range(dim_q):
                                row_block[r][k * width + a] -= coeff * base[r]
                for r in range(dim_q):
                    if any(row_block[r]) or dvec[r]:
                        eq_rows.append(row_block[r])
                        rhs.append(-dvec[r])
        if eq_rows:
            sol = solve(Matrix(eq_rows), rhs)
            assert sol is not None, "Levi lifting system is inconsistent"
            for i in range(m):
                corr = Matrix.zero(g.n, g.n)
                for a in range(width):
                    coeff = sol[i * width + a]
                    if coeff:
                        corr = corr + w_mats[a].scale(coeff)
                xs[i] = xs[i] + corr
    levi = FdLieAlgebra(g.n, xs) if xs else FdLieAlgebra(g.n, [])
    _verify_levi(g, rad, levi)
    return levi


def _unit_quo(a, w_mats, quo_coords):
    return quo_coords(w_mats[a])


def _coords_against(resid_coeffs, level_rows, nxt_rows):
    """Coordinates of a radical element modulo the next derived term, in the
    pivot-complement basis of the current term."""
    reduced_level = []
    pivots = []
    for r in level_rows:
        red = _reduce_vector(r, nxt_rows)
        reduced_level.append(red)
    basis = row_space_basis(reduced_level, len(resid_coeffs))
    coords = []
    v = list(resid_coeffs)
    for b in basis:
        p = next((j for j, w in enumerate(b) if w), None)
        coords.append(v[p] / b[p] if p is not None else QZERO)
        if p is not None and v[p]:
            cc = v[p] / b[p]
            v = [x - cc * y for x, y in zip(v, b)]
    return coords


def _verify_levi(g, rad, levi):
    assert levi.span.intersect(rad).dim == 0, "Levi meets the radical"
    dg = bracket_span(g.span, g.span)
    meet = rad.intersect(dg)
    assert meet.sum(levi.span).dim == dg.dim, "Levi does not complement r cap [g,g]"
    assert dg.contains(levi.span), "Levi is not inside the derived subalgebra"
    if levi.dim:
        killing = levi.killing()
        assert len(kernel(killing)) == 0, "Killing form on the Levi is degenerate"


def splittable_closure(g: FdLieAlgebra) -> FdLieAlgebra:
    """Smallest splittable subalgebra containing g."""
    current = g
    while True:
        extra = []
        for b in current.basis:
            ss, nil = jordan_chevalley(b)
            if not current.member(ss):
                extra.append(ss)
        if not extra:
            return current
        current = lie_close(g.n, current.basis + extra)


def is_splittable(g: FdLieAlgebra) -> bool:
    return splittable_closure(g).dim == g.dim


@dataclass
class FdDecomposition:
    nilradical: MatSpan
    levi: FdLieAlgebra
    torus: FdLieAlgebra
    reductive_part: FdLieAlgebra


def locally_reductive_part(g: FdLieAlgebra, seed: int = 0) -> FdDecomposition:
    """Splittable g = nilradical (+) (levi (+ semidirect) torus)."""
    for b in g.basis:
        ss, _ = jordan_chevalley(b)
        if not g.member(ss):
            raise NotSplittable(b)
    nil = linear_nilradical(g, seed)
    rad = solvable_radical(g)
    levi = levi_component(g)
    cent = _centralizer_span(g, rad, levi.basis)
    nil_in_cent = nil.intersect(cent)
    torus_elems = []
    comp_rows = []
    cur = list(nil_in_cent.rows)
    for r in cent.rows:
        if not in_row_space(r, cur):
            comp_rows.append(r)
            cur = row_space_basis(cur + [r], len(r))
    for row in comp_rows:
        y = unflatten(row, g.n)
        if torus_elems:
            y = _commuting_correction(g, y, torus_elems, nil_in_cent)
        ss, nl = jordan_chevalley(y)
        assert nil.member(nl), "nilpotent part escaped the nilradical"
        torus_elems.append(ss)
    torus = FdLieAlgebra(g.n, torus_elems)
    g_red = FdLieAlgebra(g.n, levi.basis + torus_elems)
    assert g_red.span.intersect(nil).dim == 0
    assert g_red.span.sum(nil).dim == g.dim
    for t in torus_elems:
        assert poly_is_squarefree(minpoly(t))
        for s in torus_elems:
            assert bracket(t, s).is_zero()
        for l in levi.basis:
            assert bracket(t, l).is_zero()
    return FdDecomposition(nil, levi, torus, g_red)


def _centralizer_span(g: FdLieAlgebra, inside: MatSpan, of_basis) -> MatSpan:
    """{x in inside : [x, b] = 0 for all b in of_basis}."""
    mats = inside.matrices()
    if not mats:
        return inside
    rows = []
    width = len(mats)
    for b in of_basis:
        for r in range(g.n):
            for cc in range(g.n):
                rows.append([bracket(m, b).entries[r][cc] for m in mats])
    coeffs = kernel(Matrix(rows)) if rows else [
        [Fraction(1) if i == j else QZERO for j in range(width)] for i in range(width)
    ]
    out = []
    for lam in coeffs:
        acc = Matrix.zero(g.n, g.n)
        for c, m in zip(lam, mats):
            if c:
                acc = acc + m.scale(c)
        out.append(acc)
    return MatSpan.from_matrices(g.n, out)


def _commuting_correction(g, y, torus_elems, nil_span):
    """y' = y - delta with delta in the nilradical part and [t, y'] = 0."""
    mats = nil_span.matrices()
    if not mats:
        for t in torus_elems:
            assert bracket(t, y).is_zero()
        return y
    rows = []
    rhs = []
    for t in torus_elems:
        target = bracket(t, y)
        for r in range(g.n):
            for c in range(g.n):
                rows.append([bracket(t, m).entries[r][c] for m in mats])
                rhs.append(target.entries[r][c])
    sol = solve(Matrix(rows), rhs)
    assert sol is not None, "no commuting correction exists"
    delta = Matrix.zero(g.n, g.n)
    for c, m in zip(sol, mats):
        if c:
            delta = delta + m.scale(c)
    return y - delta


# ---------------------------------------------------------------------------
# Cartan subalgebras of splittable algebras
# ---------------------------------------------------------------------------


def _semisimple_parts_span(h_basis, n):
    """Span of the semisimple Jordan parts of the basis, with sanity checks."""
    parts = []
    for b in h_basis:
        ss, _ = jordan_chevalley(b)
        if not ss.is_zero():
            parts.append(ss)
    for a, b in itertools.combinations(parts, 2):
        assert bracket(a, b).is_zero(), "semisimple parts fail to commute"
    return MatSpan.from_matrices(n, parts)


def centralizer_in(k: FdLieAlgebra, of_mats) -> FdLieAlgebra:
    """{x in k : [x, m] = 0 for all m}, as a subalgebra."""
    if not k.dim:
        return k
    rows = []
    for m in of_mats:
        for r in range(k.n):
            for c in range(k.n):
                rows.append([bracket(b, m).entries[r][c] for b in k.basis])
    if not rows:
        return k
    mats = []
    for lam in kernel(Matrix(rows)):
        acc = Matrix.zero(k.n, k.n)
        for cc, b in zip(lam, k.basis):
            if cc:
                acc = acc + b.scale(cc)
        mats.append(acc)
    return FdLieAlgebra(k.n, MatSpan.from_matrices(k.n, mats).matrices())


def fitting_null(k: FdLieAlgebra, h_basis) -> FdLieAlgebra:
    """Joint generalized null component of ad(h) on k: the elements killed
    by every sufficiently long word in ad of the given generators."""
    if not k.dim:
        return k
    ads = []
    for b in h_basis:
        cols = [k.span.coords_of(bracket(b, y)) for y in k.basis]
        ads.append(Matrix.from_rows(list(map(list, zip(*cols)))))
    width = k.dim
    current: list = []
    for _ in range(width + 1):
        rows = []
        for a in ads:
            resid_cols = [
                _reduce_vector([a.entries[i][j] for i in range(width)], current)
                for j in range(width)
            ]
            for r in range(width):
                rows.append([resid_cols[j][r] for j in range(width)])
        nxt = kernel(Matrix(rows)) if rows else []
        nxt_rows = row_space_basis([list(v) for v in nxt], width)
        if nxt_rows == current:
            break
        current = nxt_rows
    mats = []
    for lam in current:
        acc = Matrix.zero(k.n, k.n)
        for c, b in zip(lam, k.basis):
            if c:
                acc = acc + b.scale(c)
        mats.append(acc)
    return FdLieAlgebra(k.n, MatSpan.from_matrices(k.n, mats).matrices())


@dataclass
class CartanVerdict:
    is_cartan: bool
    via_centralizer_of_ss: bool
    via_maximal_torus: bool
    via_fitting_null: bool


def cartan_queries(k: FdLieAlgebra, h_basis, rng=None) -> CartanVerdict:
    """Three independent routes to the Cartan property of span(h) in k.

    Route D: h equals the centralizer of the semisimple parts of h.
    Route E: the semisimple parts form a maximal toral subalgebra whose
    centralizer is h.  Route F: h equals its own Fitting null component.
    Positive verdicts are additionally asserted self-normalizing and
    nilpotent.
    """
    rng = rng or random.Random(0)
    for b in h_basis:
        if not k.member(b):
            raise ValueError("candidate subalgebra is not inside k")
    h_span = MatSpan.from_matrices(k.n, h_basis)
    try:
        h_alg = FdLieAlgebra(k.n, h_span.matrices())
    except ValueError:
        return CartanVerdict(False, False, False, False)
    nilpotent = is_nilpotent_span(h_span)

    via_f = fitting_null(k, h_alg.basis).span == h_span

    if not nilpotent:
        verdict = CartanVerdict(False, False, False, via_f)
        assert not via_f, "Fitting route accepted a non-nilpotent subalgebra"
        return verdict

    ss_span = _semisimple_parts_span(h_alg.basis, k.n)
    z = centralizer_in(k, ss_span.matrices())
    via_d = z.span == h_span

    toral_maximal = _is_maximal_toral(k, ss_span, z, rng)
    via_e = toral_maximal and z.span == h_span

    verdict = CartanVerdict(via_d, via_d, via_e, via_f)
    assert via_d == via_e == via_f, "Cartan routes disagree"
    if verdict.is_cartan:
        normalizer = _normalizer_in(k, h_span)
        assert normalizer == h_span, "Cartan candidate is not self-normalizing"
        assert nilpotent
    return verdict


def _is_maximal_toral(k, ss_span, z, rng):
    """No semisimple element of the centralizer escapes the torus."""
    for y in z.basis:
        ss, _ = jordan_chevalley(y)
        if not ss_span.member(ss):
            return False
    for _ in range(6):
        y = Matrix.zero(k.n, k.n)
        for b in z.basis:
            c = rng.randrange(-2, 3)
            if c:
                y = y + b.scale(c)
        ss, _ = jordan_chevalley(y)
        if not ss_span.member(ss):
            return False
    return True


def _normalizer_in(k: FdLieAlgebra, h_span: MatSpan) -> MatSpan:
    """{x in k : [x, h] subset h}."""
    h_mats = h_span.matrices()
    coeff_rows = []
    for m in h_mats:
        for r in range(k.n * k.n):
            row = []
            for b in k.basis:
                flat = bracket(b, m).flatten()
                resid = _reduce_vector(flat, h_span.rows)
                row.append(resid[r])
            coeff_rows.append(row)
    if not coeff_rows:
        return k.span
    sols = kernel(Matrix(coeff_rows))
    mats = []
    for lam in sols:
        acc = Matrix.zero(k.n, k.n)
        for c, b in zip(lam, k.basis):
            if c:
                acc = acc + b.scale(c)
        mats.append(acc)
    return MatSpan.from_matrices(k.n, mats)


def _flatten_all(mats):
    return [m.flatten() for m in mats]


def cartan_from_torus(k: FdLieAlgebra, torus_mats) -> FdLieAlgebra:
    """Centralizer of a toral subalgebra: the Cartan subalgebra it defines."""
    for a, b in itertools.combinations(torus_mats, 2):
        if not bracket(a, b).is_zero():
            raise ValueError("torus generators do not commute")
    for a in torus_mats:
        if not poly_is_squarefree(minpoly(a)):
            raise ValueError("torus generator is not semisimple")
    return centralizer_in(k, torus_mats)


# ---------------------------------------------------------------------------
# finite flags, stabilizers, invariant taut couples
# ---------------------------------------------------------------------------


def flag_stabilizer_brute(n: int, chain) -> MatSpan:
    """{X in gl_n : X W subset W for every W in the chain} by linear solve.

    Conditions: for each basis row w of a chain member, the residual of X w
    modulo the member must vanish coordinate by coordinate."""
    cond_rows = []
    for level in chain:
        level_rows = row_space_basis([list(r) for r in level], n)
        if not level_rows or len(level_rows) == n:
            continue
        pivots = [next(j for j, v in enumerate(r) if v) for r in level_rows]
        pivot_set = set(pivots)
        for w in level_rows:
            for t in range(n):
                if t in pivot_set:
                    continue  # residual vanishes at pivot coordinates
                cond = [QZERO] * (n * n)
                for c in range(n):
                    if w[c]:
                        cond[t * n + c] += w[c]
                for p_row, piv in zip(level_rows, pivots):
                    if p_row[t]:
                        for c in range(n):
                            if w[c]:
                                cond[piv * n + c] -= p_row[t] * w[c]
                cond_rows.append(cond)
    if not cond_rows:
        return MatSpan(
            n, [unflatten_unit(i, j, n) for i in range(n) for j in range(n)]
        )
    sols = kernel(Matrix(cond_rows))
    return MatSpan(n, [list(s) for s in sols])


def unflatten_unit(i, j, n):
    row = [QZERO] * (n * n)
    row[i * n + j] = Fraction(1)
    return row


def stabilizer_formula_span(n: int, chain) -> MatSpan:
    """Sum of F'' (x) (F')-annihilator over the consecutive pairs of the
    completed chain 0 = W_0 < W_1 < ... < W_k = full."""
    levels = sorted(
        (row_space_basis([list(r) for r in level], n) for level in chain), key=len
    )
    dedup: list = [[]]
    for lvl in levels:
        if lvl and lvl != dedup[-1]:
            dedup.append(lvl)
    if len(dedup[-1]) != n:
        dedup.append(_identity_rows(n))
    mats = []
    for pred, succ in zip(dedup, dedup[1:]):
        ann = kernel(Matrix(pred)) if pred else _identity_rows(n)
        for v in succ:
            for y in ann:
                mats.append(
                    Matrix([[v[i] * y[j] for j in range(n)] for i in range(n)])
                )
    return MatSpan.from_matrices(n, mats)


@dataclass
class InvariantCoupleReport:
    chain: list  # increasing proper invariant subspaces as row bases
    stabilizer: MatSpan
    nilradical_formula: MatSpan
    nilradical_oracle: MatSpan
    algebra_nilradical: MatSpan
    seed: int

    @property
    def block_dims(self):
        dims = [0] + [len(level) for level in self.chain]
        return [b - a for a, b in zip(dims, dims[1:])]


def invariant_taut_couple(k: FdLieAlgebra, seed: int = 0) -> InvariantCoupleReport:
    """Composition series of the natural k-module, its joint stabilizer, and
    the nilradical identities that make it a taut couple at finite scale."""
    rng = random.Random(seed)
    chain = composition_series(k.basis if k.dim else [], k.n, rng)
    if not chain:
        chain = [_identity_rows(k.n)]
    p_plus_span = flag_stabilizer_brute(k.n, chain)
    n_formula = _nilradical_formula_span(k.n, chain)
    p_alg = FdLieAlgebra(k.n, p_plus_span.matrices())
    n_oracle = linear_nilradical(p_alg, seed)
    assert n_formula == n_oracle, "nilradical formula disagrees with the oracle"
    n_k = linear_nilradical(k, seed)
    meet = n_oracle.intersect(k.span)
    assert n_k == meet, "n_k != n_p cap k"
    return InvariantCoupleReport(chain, p_plus_span, n_formula, n_oracle, n_k, seed)


def _nilradical_formula_span(n, chain) -> MatSpan:
    """Sum of F'' (x) (F'')-annihilator over all pairs."""
    levels = [[]] + [row_space_basis([list(r) for r in lvl], n) for lvl in chain]
    mats = []
    for lvl in levels[1:]:
        ann = kernel(Matrix(lvl)) if lvl else _identity_rows(n)
        for v in lvl:
            for y in ann:
                mats.append(
                    Matrix([[v[i] * y[j] for j in range(n)] for i in range(n)])
                )
    return MatSpan.from_matrices(n, mats)


# ---------------------------------------------------------------------------
# parabolic tests
# ---------------------------------------------------------------------------


def _invariant_subspaces(p: FdLieAlgebra, rng, rounds=12) -> list:
    """Distinct proper nonzero p-invariant subspaces found by spinning."""
    found = []
    actions = p.basis
    seen = set()

    def record(rows):
        key = tuple(tuple(r) for r in rows)
        if rows and len(rows) < p.n and key not in seen:
            seen.add(key)
            found.append(rows)

    for i in range(p.n):
        unit = [Fraction(1) if j == i else QZERO for j in range(p.n)]
        record(spin([unit], actions, p.n))
    for theta in _theta_battery(actions, rng, p.n, rounds):
        for poly, _ in _min_poly_factors(theta):
            for w in kernel(poly_eval_matrix(poly, theta)):
                record(spin([w], actions, p.n))
    return found


@dataclass
class ParabolicReport:
    is_parabolic: bool
    chain_found: bool
    stabilizer_matches: bool
    borel_restriction_check: bool


def fd_parabolic_tests(p: FdLieAlgebra, seed: int = 0) -> ParabolicReport:
    """Invariant-chain criterion: p is parabolic at finite scale iff its
    invariant subspaces form a chain whose full stabilizer is p itself."""
    rng = random.Random(seed)
    invs = _invariant_subspaces(p, rng)
    chain_ok = True
    for a, b in itertools.combinations(invs, 2):
        a_in_b = all(in_row_space(r, b) for r in a)
        b_in_a = all(in_row_space(r, a) for r in b)
        if not (a_in_b or b_in_a):
            chain_ok = False
            break
    stab_ok = False
    if chain_ok:
        stab = flag_stabilizer_brute(p.n, invs)
        stab_ok = stab == p.span
    borel_ok = _borel_restriction_check(p, rng)
    return ParabolicReport(chain_ok and stab_ok, chain_ok, stab_ok, borel_ok)


def _full_flag_from(p: FdLieAlgebra, rng) -> list:
    """A complete flag refining a composition series of the p-action."""
    series = composition_series(p.basis if p.dim else [], p.n, rng)
    chain = []
    prev: list = []
    for level in series:
        current = list(prev)
        for w in level:
            if not in_row_space(w, current):
                current = row_space_basis(current + [w], p.n)
                chain.append(current)
        prev = level
    return chain


def _is_maximal_solvable_in(b_span: MatSpan, ambient: FdLieAlgebra, rng, tries=8) -> bool:
    if not is_solvable_span(b_span):
        return False
    candidates = [m for m in ambient.basis if not b_span.member(m)]
    for x in candidates:
        if is_solvable_span(lie_close(ambient.n, b_span.matrices() + [x]).span):
            return False
    for _ in range(tries):
        x = Matrix.zero(ambient.n, ambient.n)
        for m in ambient.basis:
            c = rng.randrange(-1, 2)
            if c:
                x = x + m.scale(c)
        if not b_span.member(x) and is_solvable_span(
            lie_close(ambient.n, b_span.matrices() + [x]).span
        ):
            return False
    return True


def _borel_restriction_check(p: FdLieAlgebra, rng) -> bool:
    """Find a Borel of p from a full invariant flag and re-test maximal
    solvability of its restriction to the commutator subalgebra."""
    flag = _full_flag_from(p, rng)
    stab = flag_stabilizer_brute(p.n, flag)
    b_span = stab.intersect(p.span)
    if not _is_maximal_solvable_in(b_span, p, rng):
        return False
    dp = bracket_span(p.span, p.span)
    try:
        dp_alg = FdLieAlgebra(p.n, dp.matrices())
    except ValueError:
        return False
    restricted = b_span.intersect(dp)
    return _is_maximal_solvable_in(restricted, dp_alg, rng)


def parabolic_bijection_check(
    g: FdLieAlgebra, p_red_basis, seed: int = 0
) -> FdLieAlgebra:
    """Map a parabolic of the reductive part to n_g (+) p_red and verify the
    round trip of the bijection."""
    rng = random.Random(seed)
    dec = locally_reductive_part(g, seed)
    g_red = dec.reductive_part
    p_red = MatSpan.from_matrices(g.n, p_red_basis)
    if not g_red.span.contains(p_red):
        raise NotParabolicInput("p_red is not inside the reductive part")
    try:
        p_red_alg = FdLieAlgebra(g.n, p_red.matrices())
    except ValueError as exc:
        raise NotParabolicInput("p_red is not a subalgebra") from exc
    # parabolic criterion inside g_red: a full invariant flag of p_red gives
    # a maximal solvable subalgebra of g_red contained in p_red
    flag = _full_flag_from(p_red_alg, rng)
    b_red = flag_stabilizer_brute(g.n, flag).intersect(g_red.span)
    if not p_red.contains(b_red):
        raise NotParabolicInput("p_red does not contain a Borel of the reductive part")
    if not _is_maximal_solvable_in(b_red, g_red, rng):
        raise NotParabolicInput("constructed candidate is not maximal solvable")
    q = lie_close(g.n, dec.nilradical.matrices() + p_red.matrices())
    assert q.dim == dec.nilradical.sum(p_red).dim, "n_g + p_red is not a subalgebra"
    borel_g = dec.nilradical.sum(b_red)
    assert q.span.contains(borel_g)
    assert _is_maximal_solvable_in(borel_g, g, rng), "n_g + b_red is not a Borel of g"
    round_trip = q.span.intersect(g_red.span)
    assert round_trip == p_red, "round trip does not recover p_red"
    return q


# ---------------------------------------------------------------------------
# standard constructions for batteries and examples
# ---------------------------------------------------------------------------


def unit_matrix(n, i, j) -> Matrix:
    return unflatten(unflatten_unit(i, j, n), n)


def gl_basis(n):
    return [unit_matrix(n, i, j) for i in range(n) for j in range(n)]


def sl_basis(n):
    out = [unit_matrix(n, i, j) for i in range(n) for j in range(n) if i != j]
    for i in range(n - 1):
        out.append(unit_matrix(n, i, i) - unit_matrix(n, i + 1, i + 1))
    return out


def upper_triangular_basis(n):
    return [unit_matrix(n, i, j) for i in range(n) for j in range(i, n)]


def strict_upper_basis(n):
    return [unit_matrix(n, i, j) for i in range(n) for j in range(i + 1, n)]


def diagonal_basis(n):
    return [unit_matrix(n, i, i) for i in range(n)]


def block_parabolic_basis(sizes):
    """Block upper-triangular matrices for the given diagonal block sizes."""
    n = sum(sizes)
    bounds = []
    start = 0
    for s in sizes:
        bounds.append((start, start + s))
        start += s

    def block_of(i):
        for idx, (a, b) in enumerate(bounds):
            if a <= i < b:
                return idx
        raise ValueError

    return [
        unit_matrix(n, i, j)
        for i in range(n)
        for j in range(n)
        if block_of(i) <= block_of(j)
    ]


def embed_block(mat: Matrix, n: int, offset: int) -> Matrix:
    out = [[QZERO] * n for _ in range(n)]
    for i in range(mat.rows):
        for j in range(mat.cols):
            out[offset + i][offset + j] = mat.entries[i][j]
    return Matrix(out)


def direct_sum_basis(blocks):
    """Basis of the direct sum of matrix algebras given as (basis, size)."""
    n = sum(size for _, size in blocks)
    out = []
    offset = 0
    for basis, size in blocks:
        for b in basis:
            out.append(embed_block(b, n, offset))
        offset += size
    return out
