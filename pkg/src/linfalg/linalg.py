"""Exact dense linear algebra over the rationals.

Matrices are lists of rows of ``Fraction``.  Rank is computed by
fraction-free (Bareiss) elimination on an integer-scaled copy; the
reduced row echelon form used for kernels and solving is done with
``Fraction`` pivots.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

Matrix = list[list[Fraction]]


def zeros(nrows: int, ncols: int) -> Matrix:
    return [[Fraction(0)] * ncols for _ in range(nrows)]


def to_fraction_matrix(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def _integer_rows(rows: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    out = []
    for row in rows:
        den = 1
        for x in row:
            den = lcm(den, Fraction(x).denominator)
        out.append([int(Fraction(x) * den) for x in row])
    return out


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    """Rank by Bareiss fraction-free elimination."""
    m = _integer_rows(rows)
    if not m or not m[0]:
        return 0
    nrows, ncols = len(m), len(m[0])
    r = 0
    prev = 1
    for c in range(ncols):
        piv = None
        for i in range(r, nrows):
            if m[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][c]
        for i in range(r + 1, nrows):
            a = m[i][c]
            row_i, row_r = m[i], m[r]
            for j in range(c, ncols):
                row_i[j] = (p * row_i[j] - a * row_r[j]) // prev
        prev = p
        r += 1
        if r == nrows:
            break
    return r


def rref(rows: Sequence[Sequence[Fraction]]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    m = [[Fraction(x) for x in row] for row in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(m)):
            if m[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                a = m[i][c]
                ri, rr = m[i], m[r]
                m[i] = [x - a * y for x, y in zip(ri, rr)]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int | None = None) -> Matrix:
    """Basis of {v : M v = 0}, one vector per free column."""
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    red, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def solve(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction],
          ncols: int | None = None) -> list[Fraction] | None:
    """One solution of M x = b, or None.

    Free variables are set to zero, so the support of the answer lies in
    the pivot columns (the earliest independent columns).
    """
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if not rows:
        return [Fraction(0)] * ncols if all(b == 0 for b in rhs) else None
    aug = [list(row) + [Fraction(b)] for row, b in zip(rows, rhs)]
    red, pivots = rref(aug)
    if pivots and pivots[-1] == ncols:
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(red, pivots):
        x[p] = row[ncols]
    return x


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if not a:
        return []
    inner = len(b)
    ncols = len(b[0]) if b else 0
    out = zeros(len(a), ncols)
    for i, row in enumerate(a):
        orow = out[i]
        for k in range(inner):
            x = row[k]
            if x == 0:
                continue
            bk = b[k]
            for j in range(ncols):
                if bk[j] != 0:
                    orow[j] += x * bk[j]
    return out


def matvec(a: Matrix, v: Sequence[Fraction]) -> list[Fraction]:
    return [sum((x * y for x, y in zip(row, v) if x != 0), Fraction(0)) for row in a]


def transpose(a: Matrix, ncols: int | None = None) -> Matrix:
    if not a:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*a)]


def is_zero(a: Matrix) -> bool:
    return all(x == 0 for row in a for x in row)


def primitive(v: Sequence[Fraction]) -> list[Fraction]:
    """Scale a nonzero vector to coprime integers with positive leading entry."""
    den = 1
    for x in v:
        den = lcm(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return [Fraction(0)] * len(v)
    lead = next(x for x in ints if x != 0)
    if lead < 0:
        g = -g
    return [Fraction(x, g) for x in ints]


def in_span(basis_rows: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> bool:
    if not any(x != 0 for x in v):
        return True
    if not basis_rows:
        return False
    return rank(list(basis_rows) + [list(v)]) == rank(basis_rows)


class SparseSpan:
    """Incrementally maintained reduced echelon basis of sparse vectors.

    Vectors are dicts ``key -> Fraction`` with sortable keys.  Every stored
    row is normalized at its pivot and the pivot key occurs in no other row.
    """

    def __init__(self, vectors=()):
        self.rows: dict = {}
        for v in vectors:
            self.add(v)

    def __len__(self):
        return len(self.rows)

    def reduce(self, vec: dict) -> dict:
        v = {k: Fraction(x) for k, x in vec.items() if x != 0}
        for p in [k for k in v if k in self.rows]:
            c = v.get(p, 0)
            if c == 0:
                continue
            for k, x in self.rows[p].items():
                nv = v.get(k, 0) - c * x
                if nv == 0:
                    v.pop(k, None)
                else:
                    v[k] = nv
        return v

    def add(self, vec: dict) -> bool:
        """Add a vector; returns True when it enlarged the span."""
        v = self.reduce(vec)
        if not v:
            return False
        p = max(v)
        inv = 1 / v[p]
        v = {k: x * inv for k, x in v.items()}
        for q, row in self.rows.items():
            c = row.get(p, 0)
            if c != 0:
                for k, x in v.items():
                    nv = row.get(k, 0) - c * x
                    if nv == 0:
                        row.pop(k, None)
                    else:
                        row[k] = nv
        self.rows[p] = v
        return True

    def contains(self, vec: dict) -> bool:
        return not self.reduce(vec)

    def basis(self) -> list[dict]:
        return [dict(self.rows[p]) for p in sorted(self.rows)]
