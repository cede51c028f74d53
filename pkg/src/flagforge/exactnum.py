"""Exact rational arithmetic and dense exact linear algebra.

Everything here works over the rationals (``fractions.Fraction``), with no
floating point anywhere.  Matrices are small and dense; elimination is done
on integer-rescaled rows so the bulk of the work runs on Python ints.

Polynomials are dense coefficient lists, index = degree.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

Rational = Fraction

QZERO = Fraction(0)
QONE = Fraction(1)


class NonSquare(ValueError):
    """Raised when an operation needs a square matrix and got a rectangle."""


def rat(x) -> Fraction:
    """Coerce ints, strings like '3/4', and Fractions to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational")


def format_rational(x: Fraction) -> str:
    """Serialize as 'p/q', omitting '/q' when q == 1."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class Matrix:
    """Dense rational matrix, immutable by convention after construction."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries):
        self.entries = [[rat(v) for v in row] for row in entries]
        self.rows = len(self.entries)
        self.cols = len(self.entries[0]) if self.entries else 0
        for row in self.entries:
            if len(row) != self.cols:
                raise ValueError("ragged rows")

    @classmethod
    def zero(cls, rows: int, cols: int) -> "Matrix":
        return cls([[QZERO] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls([[QONE if i == j else QZERO for j in range(n)] for i in range(n)])

    @classmethod
    def from_rows(cls, rows) -> "Matrix":
        return cls([list(r) for r in rows])

    def __eq__(self, other):
        return (
            isinstance(other, Matrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(tuple(r) for r in self.entries)))

    def __repr__(self):
        body = "; ".join(" ".join(format_rational(v) for v in row) for row in self.entries)
        return f"Matrix({self.rows}x{self.cols}: {body})"

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i):
        return list(self.entries[i])

    def col(self, j):
        return [self.entries[i][j] for i in range(self.rows)]

    def __add__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return Matrix(
            [
                [self.entries[i][j] + other.entries[i][j] for j in range(self.cols)]
                for i in range(self.rows)
            ]
        )

    def __sub__(self, other):
        return self + other.scale(Fraction(-1))

    def scale(self, c) -> "Matrix":
        c = rat(c)
        return Matrix([[c * v for v in row] for row in self.entries])

    def __mul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = []
        ocols = other.cols
        oent = other.entries
        for arow in self.entries:
            acc = [QZERO] * ocols
            for k, a in enumerate(arow):
                if a:
                    brow = oent[k]
                    for j in range(ocols):
                        b = brow[j]
                        if b:
                            acc[j] += a * b
            out.append(acc)
        return Matrix(out)

    def transpose(self) -> "Matrix":
        return Matrix([[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def trace(self) -> Fraction:
        if self.rows != self.cols:
            raise NonSquare("trace needs a square matrix")
        return sum((self.entries[i][i] for i in range(self.rows)), QZERO)

    def is_zero(self) -> bool:
        return all(not v for row in self.entries for v in row)

    def flatten(self) -> list[Fraction]:
        return [v for row in self.entries for v in row]


def _int_rows(rows):
    """Rescale rational rows to primitive integer rows (per-row scaling)."""
    out = []
    for row in rows:
        den = 1
        for v in row:
            den = den * v.denominator // gcd(den, v.denominator)
        ints = [v.numerator * (den // v.denominator) for v in row]
        g = 0
        for v in ints:
            g = gcd(g, v)
        if g > 1:
            ints = [v // g for v in ints]
        out.append(ints)
    return out


def _int_row_reduce(rows, cols):
    """Fraction-free row echelon on integer rows.

    Returns (echelon integer rows, pivot column list).  Rows are kept
    primitive to control entry growth; good enough at desk scale.
    """
    rows = [r[:] for r in rows]
    pivots = []
    r = 0
    for c in range(cols):
        # find a pivot row
        p = None
        for i in range(r, len(rows)):
            if rows[i][c]:
                p = i
                break
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        prow = rows[r]
        pv = prow[c]
        for i in range(len(rows)):
            if i == r:
                continue
            v = rows[i][c]
            if v:
                g = gcd(pv, v)
                a, b = pv // g, v // g
                cur = rows[i]
                new = [a * cur[j] - b * prow[j] for j in range(cols)]
                gg = 0
                for w in new:
                    gg = gcd(gg, w)
                if gg > 1:
                    new = [w // gg for w in new]
                rows[i] = new
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return [row for row in rows[:r]], pivots


def rref(m: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns; row space preserved."""
    rows = _int_rows(m.entries)
    ech, pivots = _int_row_reduce(rows, m.cols)
    # normalize pivots to 1 (back to rationals)
    out = []
    for row, c in zip(ech, pivots):
        pv = Fraction(row[c])
        out.append([Fraction(v) / pv for v in row])
    while len(out) < m.rows:
        out.append([QZERO] * m.cols)
    if not out:
        out = [[QZERO] * m.cols for _ in range(m.rows)]
    return Matrix(out) if m.cols else Matrix.zero(m.rows, 0), pivots


def rank(m: Matrix) -> int:
    return len(rref(m)[1])


def trace_of_product(a: Matrix, b: Matrix) -> Fraction:
    """tr(a b) without forming the product."""
    if a.cols != b.rows or a.rows != b.cols:
        raise ValueError("shape mismatch")
    total = QZERO
    for i in range(a.rows):
        arow = a.entries[i]
        for k in range(a.cols):
            v = arow[k]
            if v:
                w = b.entries[k][i]
                if w:
                    total += v * w
    return total


def row_space_basis(rows: list[list[Fraction]], cols: int) -> list[list[Fraction]]:
    """RREF basis of the span of the given rational rows."""
    if not rows:
        return []
    mat, pivots = rref(Matrix.from_rows(rows))
    return [mat.row(i) for i in range(len(pivots))]


def kernel(m: Matrix) -> list[list[Fraction]]:
    """Basis of the right null space {x : m x = 0}."""
    red, pivots = rref(m)
    free = [c for c in range(m.cols) if c not in pivots]
    basis = []
    for f in free:
        vec = [QZERO] * m.cols
        vec[f] = QONE
        for r, c in enumerate(pivots):
            vec[c] = -red.entries[r][f]
        basis.append(vec)
    return basis


def solve(m: Matrix, rhs: list[Fraction]):
    """One solution x of m x = rhs, or None if inconsistent."""
    aug = Matrix.from_rows([m.row(i) + [rhs[i]] for i in range(m.rows)])
    red, pivots = rref(aug)
    if m.cols in pivots:
        return None
    x = [QZERO] * m.cols
    for r, c in enumerate(pivots):
        x[c] = red.entries[r][m.cols]
    return x


def in_row_space(row: list[Fraction], basis_rows: list[list[Fraction]]) -> bool:
    """Whether row lies in the span of RREF basis_rows."""
    v = list(row)
    for b in basis_rows:
        p = next((j for j, w in enumerate(b) if w), None)
        if p is not None and v[p]:
            c = v[p] / b[p]
            v = [a - c * w for a, w in zip(v, b)]
    return all(not a for a in v)


# ---------------------------------------------------------------------------
# dense polynomial helpers over Q (coefficient lists, index = degree)
# ---------------------------------------------------------------------------


def poly_trim(p):
    while p and not p[-1]:
        p.pop()
    return p


def poly_add(p, q):
    n = max(len(p), len(q))
    out = [QZERO] * n
    for i, v in enumerate(p):
        out[i] += v
    for i, v in enumerate(q):
        out[i] += v
    return poly_trim(out)


def poly_sub(p, q):
    return poly_add(p, [-v for v in q])


def poly_scale(p, c):
    c = rat(c)
    return poly_trim([c * v for v in p])


def poly_mul(p, q):
    if not p or not q:
        return []
    out = [QZERO] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                if b:
                    out[i + j] += a * b
    return poly_trim(out)


def poly_divmod(p, q):
    q = poly_trim(list(q))
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(p)
    quo = [QZERO] * max(0, len(rem) - len(q) + 1)
    lead = q[-1]
    while len(rem) >= len(q) and poly_trim(rem[:]):
        rem = poly_trim(rem)
        if len(rem) < len(q):
            break
        c = rem[-1] / lead
        d = len(rem) - len(q)
        quo[d] = c
        for i, b in enumerate(q):
            rem[d + i] -= c * b
        rem.pop()
    return poly_trim(quo), poly_trim(rem)


def poly_mod(p, q):
    return poly_divmod(p, q)[1]


def poly_gcd(p, q):
    """Monic gcd via the Euclidean algorithm."""
    a, b = poly_trim(list(p)), poly_trim(list(q))
    while b:
        a, b = b, poly_mod(a, b)
    if a:
        lead = a[-1]
        a = [v / lead for v in a]
    return a


def poly_xgcd(p, q):
    """Extended gcd: (g, s, t) monic with s p + t q = g."""
    a, b = poly_trim(list(p)), poly_trim(list(q))
    sa, sb = [QONE], []
    ta, tb = [], [QONE]
    while b:
        quo, rem = poly_divmod(a, b)
        a, b = b, rem
        sa, sb = sb, poly_sub(sa, poly_mul(quo, sb))
        ta, tb = tb, poly_sub(ta, poly_mul(quo, tb))
    if a:
        lead = a[-1]
        a = [v / lead for v in a]
        sa = poly_scale(sa, 1 / lead)
        ta = poly_scale(ta, 1 / lead)
    return a, sa, ta


def poly_derivative(p):
    return poly_trim([i * v for i, v in enumerate(p)][1:])


def poly_squarefree_part(p):
    """p / gcd(p, p'), monic: the radical of p."""
    g = poly_gcd(p, poly_derivative(p))
    q, r = poly_divmod(p, g)
    assert not r
    if q:
        q = [v / q[-1] for v in q]
    return q


def poly_is_squarefree(p) -> bool:
    return len(poly_gcd(p, poly_derivative(p))) == 1


def poly_eval_matrix(p, m: Matrix) -> Matrix:
    """Horner evaluation of p at a square matrix."""
    n = m.rows
    acc = Matrix.zero(n, n)
    for c in reversed(p):
        acc = acc * m
        if c:
            acc = acc + Matrix.identity(n).scale(c)
    return acc


def poly_eval(p, x: Fraction) -> Fraction:
    acc = QZERO
    for c in reversed(p):
        acc = acc * x + c
    return acc


# ---------------------------------------------------------------------------
# characteristic / minimal polynomial and Jordan-Chevalley decomposition
# ---------------------------------------------------------------------------


def charpoly(m: Matrix) -> list[Fraction]:
    """Monic characteristic polynomial via Faddeev-LeVerrier."""
    if m.rows != m.cols:
        raise NonSquare("charpoly needs a square matrix")
    n = m.rows
    if n == 0:
        return [QONE]
    coeffs = [QZERO] * (n + 1)
    coeffs[n] = QONE
    mk = Matrix.identity(n)
    for k in range(1, n + 1):
        mk = m * mk
        ck = -mk.trace() / k
        coeffs[n - k] = ck
        if k < n:
            mk = mk + Matrix.identity(n).scale(ck)
    return coeffs


def minpoly(m: Matrix) -> list[Fraction]:
    """Monic minimal polynomial, found by the first linear dependency
    among I, m, m^2, ..."""
    if m.rows != m.cols:
        raise NonSquare("minpoly needs a square matrix")
    n = m.rows
    if n == 0:
        return [QONE]
    powers = [Matrix.identity(n)]
    rows = [powers[0].flatten()]
    while True:
        powers.append(powers[-1] * m)
        target = powers[-1].flatten()
        coeff_matrix = Matrix.from_rows(list(map(list, zip(*rows))))
        x = solve(coeff_matrix, target)
        if x is not None:
            # m^k = sum x_i m^i  ->  minpoly = t^k - sum x_i t^i
            k = len(rows)
            p = [-v for v in x] + [QONE]
            return poly_trim(p)
        rows.append(target)


def jordan_chevalley(m: Matrix) -> tuple[Matrix, Matrix]:
    """Split m = ss + nil with [ss, nil] = 0, nil nilpotent and the minimal
    polynomial of ss squarefree.

    ss is obtained as P(m) where P is computed by Newton iteration in
    Q[t]/(charpoly): no eigenvalues are ever extracted.
    """
    if m.rows != m.cols:
        raise NonSquare("jordan_chevalley needs a square matrix")
    n = m.rows
    if n == 0:
        return m, m
    chi = charpoly(m)
    q = poly_squarefree_part(chi)
    if len(q) == len(chi):
        # squarefree characteristic polynomial: m already semisimple
        return m, Matrix.zero(n, n)
    dq = poly_derivative(q)
    # u0: inverse of q'(t) modulo nilpotents (gcd(q, q') = 1 gives the seed)
    _, _, u = poly_xgcd(q, dq)
    s = [QZERO, QONE]  # the polynomial t
    for _ in range(n + 2):
        qs = poly_mod(_compose_mod(q, s, chi), chi)
        if not qs:
            break
        # refine u toward the inverse of q'(s) mod chi
        dqs = poly_mod(_compose_mod(dq, s, chi), chi)
        u = poly_mod(poly_mul(u, poly_sub([Fraction(2)], poly_mul(dqs, u))), chi)
        s = poly_mod(poly_sub(s, poly_mul(qs, u)), chi)
    else:
        raise AssertionError("Newton lifting did not stabilize")
    ss = poly_eval_matrix(s, m)
    nil = m - ss
    return ss, nil


def _compose_mod(p, s, mod):
    """p(s(t)) reduced modulo mod, by Horner on polynomials."""
    acc: list[Fraction] = []
    for c in reversed(p):
        acc = poly_mod(poly_mul(acc, s), mod)
        if c:
            acc = poly_add(acc, [c])
    return acc


def is_nilpotent(m: Matrix) -> bool:
    return charpoly(m)[:-1] == [QZERO] * m.rows


def is_semisimple(m: Matrix) -> bool:
    """Squarefree minimal polynomial (absolutely semisimple over extensions)."""
    return poly_is_squarefree(minpoly(m))
