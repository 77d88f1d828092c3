"""Exact linear algebra over Fraction, plus a pivoting solver for small
systems whose entries are symbolic expressions."""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .expr import Expr, ZERO, ZeroVerdict, add, is_zero, mul, powx, rat

Matrix = List[List[Fraction]]


def rref(rows: Matrix) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form; returns (rref, pivot column indices)."""
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return m, []
    nrows, ncols = len(m), len(m[0])
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        pv = m[r][c]
        m[r] = [v / pv for v in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return m, pivots


def nullspace(rows: Matrix, ncols: int) -> List[List[Fraction]]:
    """Basis of the right nullspace, scaled to primitive integer vectors."""
    if not rows:
        return [_unit(ncols, j) for j in range(ncols)]
    red, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][fc]
        basis.append(_primitive(v))
    return basis


def _unit(n: int, j: int) -> List[Fraction]:
    v = [Fraction(0)] * n
    v[j] = Fraction(1)
    return v


def _primitive(v: Sequence[Fraction]) -> List[Fraction]:
    """Scale so entries are coprime integers with positive leading entry."""
    from math import gcd, lcm

    den = 1
    for x in v:
        den = lcm(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for n in ints:
        g = gcd(g, abs(n))
    if g:
        ints = [n // g for n in ints]
    lead = next((n for n in ints if n != 0), 1)
    if lead < 0:
        ints = [-n for n in ints]
    return [Fraction(n) for n in ints]


def solve(rows: Matrix, rhs: Sequence[Fraction]) -> Optional[List[Fraction]]:
    """One solution of rows * x = rhs, or None if inconsistent.  Free
    coordinates are set to zero."""
    if not rows:
        return [] if all(b == 0 for b in rhs) else None
    ncols = len(rows[0])
    aug = [list(map(Fraction, r)) + [Fraction(b)] for r, b in zip(rows, rhs)]
    red, pivots = rref(aug)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for r, pc in enumerate(pivots):
        x[pc] = red[r][ncols]
    return x


def matmul(a: Matrix, b: Matrix) -> Matrix:
    return [[sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0))
             for j in range(len(b[0]))] for i in range(len(a))]


def matvec(a: Matrix, v: Sequence[Fraction]) -> List[Fraction]:
    return [sum((a[i][k] * v[k] for k in range(len(v))), Fraction(0))
            for i in range(len(a))]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def inverse(a: Matrix) -> Optional[Matrix]:
    n = len(a)
    aug = [list(map(Fraction, a[i])) + identity(n)[i] for i in range(n)]
    red, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        return None
    return [row[n:] for row in red]


# ---------------------------------------------------------------------------
# symbolic-entry solving (small systems; pivots need a decidable nonzero)
# ---------------------------------------------------------------------------

def solve_symbolic(rows: List[List[Expr]], rhs: List[Expr],
                   parameters=None) -> Optional[List[Expr]]:
    """Solve a small linear system with Expr entries.

    Pivots are chosen greedily: literal nonzero rationals first, then entries
    whose nonzero-ness the randomized test certifies.  Returns None when the
    system is inconsistent; raises ValueError when no usable pivot can be
    certified (undecidable symbolic entry)."""
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    nrows = len(m)
    ncols = len(rows[0]) if rows else 0
    pivots: List[Tuple[int, int]] = []
    used_rows: set = set()
    for c in range(ncols):
        cand = None
        for i in range(nrows):
            if i in used_rows:
                continue
            entry = m[i][c]
            if entry.is_zero_literal:
                continue
            v = is_zero(entry, parameters=parameters)
            if v is ZeroVerdict.NONZERO:
                from .expr import Rat

                if isinstance(entry, Rat):
                    cand = i
                    break
                if cand is None:
                    cand = i
        if cand is None:
            continue
        pivot = m[cand][c]
        inv = powx(pivot, rat(-1))
        m[cand] = [mul(inv, v) for v in m[cand]]
        for i in range(nrows):
            if i != cand and not m[i][c].is_zero_literal:
                f = m[i][c]
                m[i] = [add(a, mul(-1, f, b)) for a, b in zip(m[i], m[cand])]
        used_rows.add(cand)
        pivots.append((cand, c))
    x: List[Expr] = [ZERO] * ncols
    for i, c in pivots:
        x[c] = m[i][ncols]
    # consistency: rows without pivots must have zero rhs
    for i in range(nrows):
        if i in used_rows:
            continue
        row_ok = all(v.is_zero_literal for v in m[i][:ncols])
        if row_ok and not m[i][ncols].is_zero_literal:
            if is_zero(m[i][ncols], parameters=parameters) is ZeroVerdict.NONZERO:
                return None
            raise ValueError("cannot decide consistency of symbolic system")
        if not row_ok:
            raise ValueError("cannot certify pivots of symbolic system")
    return x
