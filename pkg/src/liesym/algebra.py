"""Lie brackets, structure constants, isomorphism invariants, and
identification of algebras of dimension <= 4 against the canonical catalog.

Structure constants are exact: rational, or rational functions of declared
parameters.  Identification works on instantiated (rational) constants and
always ships an explicit basis-change witness; the witness is verified by
re-deriving the canonical constants through it before anything is returned.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Dict, List, Optional, Sequence, Tuple

import yaml

from .expr import (
    Expr, ExprError, Rat, SymbolTable, ZERO, ONE, add, free_symbols, mul,
    rat, substitute,
)
from .jets import VectorField
from .linalg import Matrix, identity, matmul, nullspace, rref, solve
from .linalg import solve_symbolic


class NotClosedError(ExprError):
    def __init__(self, i: int, j: int, leftover):
        super().__init__(
            f"bracket [e{i + 1}, e{j + 1}] leaves the span; leftover {leftover!r}")
        self.pair = (i, j)
        self.leftover = leftover


class DependentBasisError(ExprError):
    pass


# ---------------------------------------------------------------------------
# brackets of vector fields
# ---------------------------------------------------------------------------

def bracket(X: VectorField, Y: VectorField) -> VectorField:
    """Commutator [X, Y] of point fields."""
    return VectorField(
        add(X.apply_to(Y.xi_t), mul(-1, Y.apply_to(X.xi_t))),
        add(X.apply_to(Y.xi_x), mul(-1, Y.apply_to(X.xi_x))),
        add(X.apply_to(Y.eta), mul(-1, Y.apply_to(X.eta))),
    )


_FIELD_VARS = ("t", "x", "u")


def _coefficient_map(e: Expr) -> Dict[tuple, Tuple[Expr, Expr]]:
    """Split into {monomial-in-(t,x,u) -> parameter coefficient}."""
    from .expr import Add, Mul

    out: Dict[tuple, Tuple[Expr, Expr]] = {}
    terms = e.terms if isinstance(e, Add) else (e,)
    for term in terms:
        if term.is_zero_literal:
            continue
        if isinstance(term, Mul):
            coeff_parts: List[Expr] = [rat(term.coeff)]
            mono_parts: List[Expr] = []
            for f in term.factors:
                if free_symbols(f) & set(_FIELD_VARS):
                    mono_parts.append(f)
                else:
                    coeff_parts.append(f)
            mono = mul(*mono_parts) if mono_parts else ONE
            coeff = mul(*coeff_parts)
        elif free_symbols(term) & set(_FIELD_VARS):
            mono, coeff = term, ONE
        else:
            mono, coeff = ONE, term
        k = mono.key()
        if k in out:
            out[k] = (mono, add(out[k][1], coeff))
        else:
            out[k] = (mono, coeff)
    return {k: v for k, v in out.items() if not v[1].is_zero_literal}


def field_coordinates(fields: Sequence[VectorField]
                      ) -> Tuple[List[tuple], List[List[Expr]]]:
    """Exact coordinates of fields over the joint monomial support.

    Returns (row keys, columns), columns[k] being field k's coordinate
    vector."""
    maps = []
    keys: set = set()
    for f in fields:
        per = []
        for slot, coef in enumerate((f.xi_t, f.xi_x, f.eta)):
            cm = _coefficient_map(coef)
            per.append(cm)
            keys |= {(slot, k) for k in cm}
        maps.append(per)
    rows = sorted(keys)
    columns = []
    for per in maps:
        col = []
        for slot, k in rows:
            entry = per[slot].get(k)
            col.append(entry[1] if entry else ZERO)
        columns.append(col)
    return rows, columns


def _rank_at_samples(columns: List[List[Expr]], parameters: set) -> int:
    from .expr import evaluate_exact, sample_assignment

    best = 0
    names = set()
    for col in columns:
        for e in col:
            names |= free_symbols(e)
    for i in range(2):
        assignment = sample_assignment(names, i, parameters=parameters or set(names))
        try:
            mat = [[evaluate_exact(col[r], assignment)
                    for col in columns] for r in range(len(columns[0]))]
        except (ZeroDivisionError, ExprError):
            continue
        _, pivots = rref(mat)
        best = max(best, len(pivots))
    return best


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    """Ordered basis with exact structure constants
    [e_i, e_j] = sum_k c[i][j][k] e_k."""

    dim: int
    c: Tuple[Tuple[Tuple[Expr, ...], ...], ...]
    basis: Optional[Tuple[VectorField, ...]] = None

    @classmethod
    def from_constants(cls, dim: int,
                       entries: Dict[Tuple[int, int], Sequence],
                       basis: Optional[Sequence[VectorField]] = None,
                       check_jacobi: bool = True) -> "LieAlgebra":
        """entries: {(i, j) -> coefficient vector of [e_i, e_j]}, i < j."""
        c = [[[ZERO] * dim for _ in range(dim)] for _ in range(dim)]
        for (i, j), vec in entries.items():
            for k, v in enumerate(vec):
                ve = v if isinstance(v, Expr) else rat(v)
                c[i][j][k] = ve
                c[j][i][k] = mul(-1, ve)
        L = cls(dim=dim,
                c=tuple(tuple(tuple(row) for row in plane) for plane in c),
                basis=tuple(basis) if basis else None)
        if check_jacobi:
            L.check_jacobi()
        return L

    def bracket_vectors(self, v: Sequence[Expr], w: Sequence[Expr]) -> List[Expr]:
        out = [ZERO] * self.dim
        for i in range(self.dim):
            if isinstance(v[i], Rat) and v[i].value == 0:
                continue
            for j in range(self.dim):
                if isinstance(w[j], Rat) and w[j].value == 0:
                    continue
                for k in range(self.dim):
                    cij = self.c[i][j][k]
                    if not cij.is_zero_literal:
                        out[k] = add(out[k], mul(v[i], w[j], cij))
        return out

    def ad_matrix_expr(self, i: int) -> List[List[Expr]]:
        """Matrix of ad e_i: column j holds [e_i, e_j]."""
        return [[self.c[i][j][k] for j in range(self.dim)]
                for k in range(self.dim)]

    def parameters(self) -> set:
        names: set = set()
        for plane in self.c:
            for row in plane:
                for e in row:
                    names |= free_symbols(e)
        return names

    def is_symbolic(self) -> bool:
        return bool(self.parameters())

    def rational_constants(self) -> List[List[List[Fraction]]]:
        if self.is_symbolic():
            raise ExprError("instantiate algebra parameters first")
        return [[[self.c[i][j][k].value if isinstance(self.c[i][j][k], Rat)
                  else Fraction(0) for k in range(self.dim)]
                 for j in range(self.dim)] for i in range(self.dim)]

    def instantiate(self, bindings: Dict[str, "Expr | int | Fraction"]
                    ) -> "LieAlgebra":
        b = {k: (v if isinstance(v, Expr) else rat(v))
             for k, v in bindings.items()}
        entries = {}
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                entries[(i, j)] = [substitute(e, b) for e in self.c[i][j]]
        return LieAlgebra.from_constants(self.dim, entries, self.basis,
                                         check_jacobi=False)

    def check_jacobi(self):
        """Jacobi identity as canonical-form zero, including parametric
        constants."""
        n = self.dim
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    for l in range(n):
                        total = ZERO
                        for m in range(n):
                            total = add(
                                total,
                                mul(self.c[i][j][m], self.c[m][k][l]),
                                mul(self.c[j][k][m], self.c[m][i][l]),
                                mul(self.c[k][i][m], self.c[m][j][l]))
                        if not total.is_zero_literal:
                            raise ExprError(
                                f"Jacobi identity fails at ({i},{j},{k};{l}): "
                                f"{total!r}")

    def check_antisymmetry(self):
        for i in range(self.dim):
            for j in range(self.dim):
                for k in range(self.dim):
                    if not add(self.c[i][j][k], self.c[j][i][k]).is_zero_literal:
                        raise ExprError("antisymmetry violated")


def structure_constants(basis: Sequence[VectorField],
                        parameters: Optional[set] = None) -> LieAlgebra:
    """Expand every pairwise bracket in the given basis.

    Raises DependentBasisError when the fields are linearly dependent (rank
    checked at exact sample points) and NotClosedError when some bracket
    leaves the span."""
    n = len(basis)
    rows, columns = field_coordinates(basis)
    if _rank_at_samples(columns, parameters or set()) < n:
        raise DependentBasisError("basis fields are linearly dependent")
    entries = {}
    for i in range(n):
        for j in range(i + 1, n):
            Z = bracket(basis[i], basis[j])
            # joint support so the bracket's monomials align with the basis
            joint_rows, joint_cols = field_coordinates(list(basis) + [Z])
            mat = [[joint_cols[c][r] for c in range(n)]
                   for r in range(len(joint_rows))]
            rhs = [joint_cols[n][r] for r in range(len(joint_rows))]
            try:
                sol = solve_symbolic(mat, rhs, parameters=parameters)
            except ValueError as exc:
                raise NotClosedError(i, j, str(exc))
            if sol is None:
                raise NotClosedError(i, j, Z)
            entries[(i, j)] = sol
    return LieAlgebra.from_constants(n, entries, basis)


@dataclass
class ClosureReport:
    closed: bool
    violations: List[Tuple[int, int, str]]
    algebra: Optional[LieAlgebra]


def check_closure(fields: Sequence[VectorField]) -> ClosureReport:
    """Span-closure under brackets; violations are reported, not hidden."""
    try:
        L = structure_constants(fields)
        return ClosureReport(True, [], L)
    except NotClosedError as exc:
        return ClosureReport(False, [(exc.pair[0], exc.pair[1],
                                      str(exc))], None)


# ---------------------------------------------------------------------------
# invariants
# ---------------------------------------------------------------------------

def _span_rows(vectors: List[List[Fraction]]) -> List[List[Fraction]]:
    if not vectors:
        return []
    red, pivots = rref(vectors)
    return [red[r] for r in range(len(pivots))]


def _subspace_brackets(L: LieAlgebra, a: List[List[Fraction]],
                       b: List[List[Fraction]]) -> List[List[Fraction]]:
    c = L.rational_constants()
    n = L.dim
    out = []
    for v in a:
        for w in b:
            vec = [Fraction(0)] * n
            for i in range(n):
                if v[i] == 0:
                    continue
                for j in range(n):
                    if w[j] == 0:
                        continue
                    for k in range(n):
                        vec[k] += v[i] * w[j] * c[i][j][k]
            if any(vec):
                out.append(vec)
    return _span_rows(out)


def derived_subalgebra(L: LieAlgebra) -> List[List[Fraction]]:
    full = identity(L.dim)
    return _subspace_brackets(L, full, full)


def center(L: LieAlgebra) -> List[List[Fraction]]:
    c = L.rational_constants()
    n = L.dim
    rows = []
    for j in range(n):
        for k in range(n):
            rows.append([c[i][j][k] for i in range(n)])
    return nullspace(rows, n)


def killing_form(L: LieAlgebra) -> Matrix:
    c = L.rational_constants()
    n = L.dim
    ad = [[[c[i][j][k] for j in range(n)] for k in range(n)]
          for i in range(n)]
    K = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            prod = matmul(ad[i], ad[j])
            K[i][j] = sum((prod[k][k] for k in range(n)), Fraction(0))
    return K


def _signature(K: Matrix) -> Tuple[int, int]:
    """(positive, negative) inertia of a symmetric rational matrix, by
    exact congruence diagonalization."""
    n = len(K)
    m = [row[:] for row in K]
    pos = neg = 0
    idx = list(range(n))
    for step in range(n):
        piv = None
        for i in range(step, n):
            if m[i][i] != 0:
                piv = i
                break
        if piv is None:
            found = False
            for i in range(step, n):
                for j in range(i + 1, n):
                    if m[i][j] != 0:
                        for k in range(n):
                            m[i][k] += m[j][k]
                        for k in range(n):
                            m[k][i] += m[k][j]
                        piv = i
                        found = True
                        break
                if found:
                    break
            if piv is None:
                break
        if piv != step:
            m[step], m[piv] = m[piv], m[step]
            for row in m:
                row[step], row[piv] = row[piv], row[step]
        d = m[step][step]
        if d > 0:
            pos += 1
        elif d < 0:
            neg += 1
        for i in range(step + 1, n):
            if m[i][step] != 0:
                f = m[i][step] / d
                for k in range(n):
                    m[i][k] -= f * m[step][k]
                for k in range(n):
                    m[k][i] -= f * m[k][step]
    return pos, neg


@dataclass(frozen=True)
class AlgebraInvariants:
    """Isomorphism-invariant fingerprint used by identification."""

    dim: int
    derived_dims: Tuple[int, ...]
    lower_central_dims: Tuple[int, ...]
    center_dim: int
    killing_rank: int
    killing_signature: Tuple[int, int]
    derived_abelian: bool

    @property
    def abelian(self) -> bool:
        return not self.derived_dims

    @property
    def solvable(self) -> bool:
        return True if not self.derived_dims else self.derived_dims[-1] == 0

    @property
    def nilpotent(self) -> bool:
        return (True if not self.lower_central_dims
                else self.lower_central_dims[-1] == 0)


def algebra_invariants(L: LieAlgebra) -> AlgebraInvariants:
    full = identity(L.dim)
    derived_dims = []
    cur = _subspace_brackets(L, full, full)
    while True:
        derived_dims.append(len(cur))
        if len(cur) == 0:
            break
        nxt = _subspace_brackets(L, cur, cur)
        if len(nxt) == len(cur):
            derived_dims.append(len(nxt))
            break
        cur = nxt
    lc_dims = []
    cur = _subspace_brackets(L, full, full)
    while True:
        lc_dims.append(len(cur))
        if len(cur) == 0:
            break
        nxt = _subspace_brackets(L, cur, full)
        if len(nxt) == len(cur):
            lc_dims.append(len(nxt))
            break
        cur = nxt
    derived = _subspace_brackets(L, full, full)
    derived_ab = len(_subspace_brackets(L, derived, derived)) == 0
    K = killing_form(L)
    pos, neg = _signature(K)
    if not derived_dims or derived_dims[0] == 0:
        derived_dims = []
        lc_dims = []
    return AlgebraInvariants(
        dim=L.dim,
        derived_dims=tuple(derived_dims),
        lower_central_dims=tuple(lc_dims),
        center_dim=len(center(L)),
        killing_rank=len(rref(K)[1]) if any(any(r) for r in K) else 0,
        killing_signature=(pos, neg),
        derived_abelian=derived_ab,
    )


# ---------------------------------------------------------------------------
# canonical catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CanonicalClass:
    name: str
    dim: int
    algebra: LieAlgebra
    parameter: Optional[str] = None
    parameter_range: str = ""
    discrete: Tuple[Tuple[str, Tuple[Tuple[Fraction, ...], ...]], ...] = ()

    def instantiated(self, a: Optional[Fraction]) -> LieAlgebra:
        if self.parameter is None:
            return self.algebra
        if a is None:
            raise ValueError(f"{self.name} needs its parameter")
        return self.algebra.instantiate({self.parameter: a})

    def discrete_maps(self) -> Dict[str, Matrix]:
        return {name: [list(row) for row in mat]
                for name, mat in self.discrete}


_catalog_cache: Optional[Dict[str, CanonicalClass]] = None


def load_class_catalog() -> Dict[str, CanonicalClass]:
    """Canonical classes from the packaged data file."""
    global _catalog_cache
    if _catalog_cache is not None:
        return _catalog_cache
    text = (resources.files("liesym") / "data" / "algebra_catalog.yaml").read_text()
    raw = yaml.safe_load(text)
    table = SymbolTable()
    table.parameter("a")
    from .dsl import parse

    out: Dict[str, CanonicalClass] = {}
    for item in raw["classes"]:
        dim = item["dim"]
        entries: Dict[Tuple[int, int], List[Expr]] = {}
        for i, j, k, coeff in item.get("brackets", []):
            vec = entries.setdefault((i - 1, j - 1), [ZERO] * dim)
            vec[k - 1] = add(vec[k - 1], parse(str(coeff), table))
        param = item.get("parameter") or {}
        discrete = tuple(
            (name, tuple(tuple(Fraction(v) for v in row) for row in mat))
            for name, mat in sorted(item.get("discrete", {}).items()))
        algebra = LieAlgebra.from_constants(dim, entries, check_jacobi=False)
        out[item["name"]] = CanonicalClass(
            name=item["name"], dim=dim, algebra=algebra,
            parameter=param.get("name"),
            parameter_range=param.get("range", ""),
            discrete=discrete)
    _catalog_cache = out
    return out


def sum_with_a1(base: CanonicalClass) -> CanonicalClass:
    """Direct sum X + A1 of a catalog class with a central line."""
    dim = base.dim + 1
    entries = {}
    for i in range(base.dim):
        for j in range(i + 1, base.dim):
            vec = list(base.algebra.c[i][j]) + [ZERO]
            entries[(i, j)] = vec
    discrete = []
    for name, mat in base.discrete:
        ext = tuple(tuple(list(row) + [Fraction(0)]) for row in mat)
        ext = ext + ((tuple([Fraction(0)] * base.dim + [Fraction(1)])),)
        discrete.append((name, ext))
    flip = tuple(
        tuple(Fraction(int(i == j)) * (Fraction(-1) if i == base.dim and j == base.dim else Fraction(1))
              for j in range(dim)) for i in range(dim))
    discrete.append(("Z-flip", flip))
    name = "A2+2A1" if base.name == "A2+A1" else f"{base.name}+A1"
    return CanonicalClass(
        name=name, dim=dim,
        algebra=LieAlgebra.from_constants(dim, entries, check_jacobi=False),
        parameter=base.parameter, parameter_range=base.parameter_range,
        discrete=tuple(discrete))


# ---------------------------------------------------------------------------
# identification
# ---------------------------------------------------------------------------

@dataclass
class Identification:
    status: str                    # "identified" | "unidentified"
    label: str = ""
    parameter: Optional[Fraction] = None
    witness: Optional[Matrix] = None   # rows: new basis in old coordinates
    canonical: Optional[CanonicalClass] = None
    reason: str = ""
    invariants: Optional[AlgebraInvariants] = None

    @property
    def display(self) -> str:
        if self.status != "identified":
            return f"unidentified ({self.reason})"
        if self.parameter is not None:
            return f"{self.label}^a with a={self.parameter}"
        return self.label


def _transform_constants(L: LieAlgebra, T: Matrix) -> List[List[List[Fraction]]]:
    """Structure constants in the basis f_i = sum_j T[i][j] e_j."""
    n = L.dim
    Tt = [[T[i][j] for i in range(n)] for j in range(n)]
    out = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            w = [x if isinstance(x, Fraction) else Fraction(x)
                 for x in _bracket_rational(L, T[i], T[j])]
            y = solve(Tt, w)
            if y is None:
                raise ExprError("witness basis is singular")
            for k in range(n):
                out[i][j][k] = y[k]
    return out


def _bracket_rational(L: LieAlgebra, v: Sequence[Fraction],
                      w: Sequence[Fraction]) -> List[Fraction]:
    c = L.rational_constants()
    n = L.dim
    out = [Fraction(0)] * n
    for i in range(n):
        if v[i] == 0:
            continue
        for j in range(n):
            if w[j] == 0:
                continue
            for k in range(n):
                out[k] += v[i] * w[j] * c[i][j][k]
    return out


def _verify_witness(L: LieAlgebra, T: Matrix, cls: CanonicalClass,
                    a: Optional[Fraction]) -> bool:
    want = cls.instantiated(a).rational_constants()
    got = _transform_constants(L, T)
    return got == want


def _ad_on_subspace(L: LieAlgebra, v: List[Fraction],
                    sub: List[List[Fraction]]) -> Optional[Matrix]:
    """Matrix of ad v restricted to span(sub) in the sub basis; None if the
    image leaves the subspace."""
    cols = []
    for w in sub:
        img = _bracket_rational(L, v, w)
        y = _in_span_coords(sub, img)
        if y is None:
            return None
        cols.append(y)
    k = len(sub)
    return [[cols[j][i] for j in range(k)] for i in range(k)]


def _in_span_coords(rows: List[List[Fraction]],
                    vec: List[Fraction]) -> Optional[List[Fraction]]:
    if not rows:
        return None if any(vec) else []
    mat = [[rows[j][i] for j in range(len(rows))] for i in range(len(vec))]
    return solve(mat, vec)


def _complement(rows: List[List[Fraction]], n: int,
                avoid: Optional[List[Fraction]] = None) -> List[List[Fraction]]:
    """Extend span(rows) to codimension 0 (or 1 avoiding a vector)."""
    out = [r[:] for r in rows]
    target = n if avoid is None else n - 1
    for j in range(n):
        if len(out) >= target:
            break
        cand = [Fraction(int(i == j)) for i in range(n)]
        trial = out + [cand]
        if len(rref(trial)[1]) != len(out) + 1:
            continue
        if avoid is not None and len(rref(trial + [avoid])[1]) == len(trial):
            continue
        out.append(cand)
    return out


def _rational_roots_quadratic(tr: Fraction, det: Fraction
                              ) -> Optional[Tuple[Fraction, Fraction]]:
    """Rational roots of x^2 - tr x + det, if they exist."""
    disc = tr * tr - 4 * det
    if disc < 0:
        return None
    from .expr import _int_nth_root

    num = _int_nth_root(disc.numerator, 2)
    den = _int_nth_root(disc.denominator, 2)
    if num is None or den is None:
        return None
    s = Fraction(num, den)
    return (tr + s) / 2, (tr - s) / 2


def identify(L: LieAlgebra) -> Identification:
    """Match against the canonical catalog with an explicit, verified
    basis-change witness.  Honest failures return status 'unidentified'."""
    if L.is_symbolic():
        return Identification(status="unidentified",
                              reason="parametric constants; instantiate first")
    if L.dim > 4:
        return Identification(status="unidentified",
                              reason=f"dimension {L.dim} outside the catalog")
    inv = algebra_invariants(L)
    catalog = load_class_catalog()
    ident = _identify_inner(L, inv, catalog)
    ident.invariants = inv
    if ident.status == "identified":
        if not _verify_witness(L, ident.witness, ident.canonical,
                               ident.parameter):
            return Identification(
                status="unidentified", invariants=inv,
                reason=f"witness verification failed for {ident.label}")
    return ident


def _identify_inner(L: LieAlgebra, inv: AlgebraInvariants,
                    catalog: Dict[str, CanonicalClass]) -> Identification:
    n = L.dim
    if inv.abelian:
        name = {1: "A1", 2: "2A1", 3: "3A1", 4: "4A1"}[n]
        return Identification(status="identified", label=name,
                              witness=identity(n), canonical=catalog[name])
    if n == 2:
        return _identify_a2(L, catalog)
    if n == 3:
        return _identify_dim3(L, inv, catalog)
    return _identify_dim4(L, inv, catalog)


def _identify_a2(L: LieAlgebra, catalog) -> Identification:
    w = derived_subalgebra(L)[0]
    lam = None
    for j in range(L.dim):
        ej = [Fraction(int(i == j)) for i in range(L.dim)]
        img = _bracket_rational(L, w, ej)
        y = _in_span_coords([w], img)
        if y and y[0] != 0:
            lam, v = y[0], ej
            break
    T = [w, [x / lam for x in v]]
    return Identification(status="identified", label="A2", witness=T,
                          canonical=catalog["A2"])


def _identify_dim3(L: LieAlgebra, inv: AlgebraInvariants,
                   catalog) -> Identification:
    derived = derived_subalgebra(L)
    dd = len(derived)
    if dd == 3:
        return _identify_simple3(L, inv, catalog)
    if dd == 1:
        z = center(L)
        if z and _in_span_coords(z, derived[0]) is not None:
            # derived line is central: Heisenberg
            return _identify_heisenberg(L, catalog)
        return _identify_a2a1(L, catalog)
    # dd == 2: solvable with 2-dim abelian nilradical acted on by ad e3
    return _identify_solvable3(L, derived, catalog)


def _identify_heisenberg(L: LieAlgebra, catalog) -> Identification:
    w = derived_subalgebra(L)[0]
    n = 3
    for i in range(n):
        for j in range(i + 1, n):
            ei = [Fraction(int(a == i)) for a in range(n)]
            ej = [Fraction(int(a == j)) for a in range(n)]
            img = _bracket_rational(L, ei, ej)
            y = _in_span_coords([w], img)
            if y and y[0] != 0:
                f2, f3 = ei, [x / y[0] for x in ej]
                return Identification(
                    status="identified", label="A3,1",
                    witness=[w, f2, f3], canonical=catalog["A3,1"])
    return Identification(status="unidentified",
                          reason="no Heisenberg pair among basis vectors")


def _identify_a2a1(L: LieAlgebra, catalog) -> Identification:
    w = derived_subalgebra(L)[0]
    n = 3
    f2 = None
    for j in range(n):
        ej = [Fraction(int(a == j)) for a in range(n)]
        img = _bracket_rational(L, w, ej)
        y = _in_span_coords([w], img)
        if y and y[0] != 0:
            f2 = [x / y[0] for x in ej]
            break
    z = center(L)
    if not z or f2 is None:
        return Identification(status="unidentified",
                              reason="missing center for A2+A1 shape")
    zv = z[0]
    if len(rref([w, f2, zv])[1]) != 3:
        return Identification(status="unidentified",
                              reason="center inside the A2 block")
    return Identification(status="identified", label="A2+A1",
                          witness=[w, f2, zv], canonical=catalog["A2+A1"])


def _identify_solvable3(L: LieAlgebra, derived: List[List[Fraction]],
                        catalog) -> Identification:
    n = 3
    comp = _complement(derived, n)
    v3 = comp[2] if len(comp) == 3 else None
    if v3 is None:
        return Identification(status="unidentified",
                              reason="no complement to the nilradical")
    M = _ad_on_subspace(L, v3, derived)
    if M is None:
        return Identification(status="unidentified",
                              reason="nilradical is not an ideal")
    tr = M[0][0] + M[1][1]
    det = M[0][0] * M[1][1] - M[0][1] * M[1][0]
    if det == 0:
        return Identification(status="unidentified",
                              reason="singular adjoint action on the nilradical")
    roots = _rational_roots_quadratic(tr, det)
    if roots is None:
        disc = tr * tr - 4 * det
        if disc < 0:
            return _identify_rotation3(L, derived, v3, M, tr, det, catalog)
        return Identification(
            status="unidentified",
            reason="irrational eigenvalues of the adjoint action; no exact "
                   "witness exists over the rationals")
    l1, l2 = roots
    if l1 == l2:
        lam = l1
        N = [[M[0][0] / lam - 1, M[0][1] / lam],
             [M[1][0] / lam, M[1][1] / lam - 1]]
        # N = ad(e3)/lam - I; nonzero N means Jordan block (A3,2)
        if all(x == 0 for row in N for x in row):
            f3 = [-x / lam for x in v3]
            return Identification(
                status="identified", label="A3,3",
                witness=[derived[0], derived[1], f3],
                canonical=catalog["A3,3"])
        # pick f2 outside ker N, set f1 = N f2 (in nilradical coordinates)
        f2c = [Fraction(1), Fraction(0)]
        if N[0][0] == 0 and N[1][0] == 0:
            f2c = [Fraction(0), Fraction(1)]
        f1c = [N[0][0] * f2c[0] + N[0][1] * f2c[1],
               N[1][0] * f2c[0] + N[1][1] * f2c[1]]
        f1 = _lift(derived, f1c)
        f2 = _lift(derived, f2c)
        f3 = [-x / lam for x in v3]
        return Identification(status="identified", label="A3,2",
                              witness=[f1, f2, f3], canonical=catalog["A3,2"])
    # distinct rational eigenvalues
    if abs(l1) < abs(l2):
        l1, l2 = l2, l1
    a = l2 / l1
    v1 = _eigvec2(M, l1)
    v2 = _eigvec2(M, l2)
    f1 = _lift(derived, v1)
    f2 = _lift(derived, v2)
    f3 = [-x / l1 for x in v3]
    if a == -1:
        return Identification(status="identified", label="A3,4",
                              witness=[f1, f2, f3], canonical=catalog["A3,4"])
    return Identification(status="identified", label="A3,5", parameter=a,
                          witness=[f1, f2, f3], canonical=catalog["A3,5"])


def _identify_rotation3(L: LieAlgebra, derived, v3, M, tr, det,
                        catalog) -> Identification:
    """Complex eigenvalues sigma +- i omega: A3,6 (sigma = 0) or A3,7^a with
    a = -sigma/omega normalized positive; needs omega rational."""
    from .expr import _int_nth_root

    disc = 4 * det - tr * tr
    num = _int_nth_root(disc.numerator, 2)
    den = _int_nth_root(disc.denominator, 2)
    if num is None or den is None:
        return Identification(
            status="unidentified",
            reason="irrational rotation rate; no exact witness over Q")
    omega = Fraction(num, den) / 2
    sigma = tr / 2
    # scale f3 = v3/omega' so ad f3 = [[-a,-1],[1,-a]] for some sign choice
    for sgn in (1, -1):
        scale = Fraction(sgn) / omega
        a = -sigma * scale
        if a < 0:
            continue
        Mf = [[M[0][0] * scale, M[0][1] * scale],
              [M[1][0] * scale, M[1][1] * scale]]
        N = [[Mf[0][0] + a, Mf[0][1]], [Mf[1][0], Mf[1][1] + a]]
        f1c = [Fraction(1), Fraction(0)]
        f2c = [N[0][0] * f1c[0] + N[0][1] * f1c[1],
               N[1][0] * f1c[0] + N[1][1] * f1c[1]]
        if f2c == [Fraction(0), Fraction(0)]:
            f1c = [Fraction(0), Fraction(1)]
            f2c = [N[0][1], N[1][1]]
        f1 = _lift(derived, f1c)
        f2 = _lift(derived, f2c)
        f3 = [x * scale for x in v3]
        if a == 0:
            return Identification(status="identified", label="A3,6",
                                  witness=[f1, f2, f3],
                                  canonical=catalog["A3,6"])
        return Identification(status="identified", label="A3,7", parameter=a,
                              witness=[f1, f2, f3], canonical=catalog["A3,7"])
    return Identification(status="unidentified",
                          reason="could not normalize the rotation block")


def _identify_simple3(L: LieAlgebra, inv: AlgebraInvariants,
                      catalog) -> Identification:
    pos, neg = inv.killing_signature
    if neg == 3:
        # so(3): canonical only if the constants already match
        cc = catalog["A3,9"]
        if L.rational_constants() == cc.algebra.rational_constants():
            return Identification(status="identified", label="A3,9",
                                  witness=identity(3), canonical=cc)
        return Identification(
            status="unidentified",
            reason="compact simple algebra; no rational canonical frame "
                   "found within search bounds")
    return _identify_sl2(L, catalog)


def _sl2_triple(L: LieAlgebra) -> Optional[Tuple[List[Fraction], List[Fraction], List[Fraction]]]:
    """Search small rational vectors for a nilpotent E, then complete to an
    (E, H, F) triple by exact linear solves."""
    n = 3
    coeff_range = [Fraction(v) for v in (-2, -1, 0, 1, 2)]
    candidates = []
    for vec in itertools.product(coeff_range, repeat=3):
        if not any(vec):
            continue
        candidates.append(list(vec))
    for E in candidates:
        adE = _ad_of(L, E)
        sq = matmul(adE, adE)
        cube = matmul(sq, adE)
        if any(any(r) for r in cube) or not any(any(r) for r in sq):
            continue
        # solve [H, E] = 2E, then F with [E, F] = H and [H, F] = -2F
        H = _solve_ad_equation(L, E, [2 * x for x in E])
        if H is None:
            continue
        F = _solve_pair(L, E, H)
        if F is not None:
            return E, H, F
    return None


def _ad_of(L: LieAlgebra, v: List[Fraction]) -> Matrix:
    n = L.dim
    cols = []
    for j in range(n):
        ej = [Fraction(int(i == j)) for i in range(n)]
        cols.append(_bracket_rational(L, v, ej))
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def _solve_ad_equation(L: LieAlgebra, e: List[Fraction],
                       target: List[Fraction]) -> Optional[List[Fraction]]:
    """Solve [x, e] = target for x."""
    n = L.dim
    cols = []
    for j in range(n):
        ej = [Fraction(int(i == j)) for i in range(n)]
        cols.append(_bracket_rational(L, ej, e))
    mat = [[cols[j][i] for j in range(n)] for i in range(n)]
    return solve(mat, target)


def _solve_pair(L: LieAlgebra, E, H) -> Optional[List[Fraction]]:
    """Solve [E, F] = H and [H, F] = -2F jointly (linear in F)."""
    n = L.dim
    adE = _ad_of(L, E)
    adH = _ad_of(L, H)
    rows: List[List[Fraction]] = []
    rhs: List[Fraction] = []
    for i in range(n):
        rows.append([adE[i][j] for j in range(n)])
        rhs.append(H[i])
    for i in range(n):
        rows.append([adH[i][j] + 2 * Fraction(int(i == j)) for j in range(n)])
        rhs.append(Fraction(0))
    return solve(rows, rhs)


def _identify_sl2(L: LieAlgebra, catalog) -> Identification:
    triple = _sl2_triple(L)
    if triple is None:
        return Identification(
            status="unidentified",
            reason="split form not found within search bounds (possibly an "
                   "anisotropic rational form of sl2)")
    E, H, F = triple
    f1 = E
    f2 = [-x / 2 for x in H]
    f3 = F
    return Identification(status="identified", label="A3,8",
                          witness=[f1, f2, f3], canonical=catalog["A3,8"])


def _lift(rows: List[List[Fraction]], coords: List[Fraction]) -> List[Fraction]:
    n = len(rows[0])
    out = [Fraction(0)] * n
    for c, r in zip(coords, rows):
        for i in range(n):
            out[i] += c * r[i]
    return out


def _identify_dim4(L: LieAlgebra, inv: AlgebraInvariants,
                   catalog) -> Identification:
    n = 4
    derived = derived_subalgebra(L)
    Z = center(L)
    # split off a central line not inside the derived algebra
    for z in Z:
        if _in_span_coords(derived, z) is None or not derived:
            S = _complement(derived, n, avoid=z)
            if len(S) != 3:
                continue
            sub = _sub_algebra(L, S)
            if sub is None:
                continue
            inner = identify(sub)
            if inner.status != "identified":
                return Identification(
                    status="unidentified",
                    reason=f"3-dim summand unidentified: {inner.reason}")
            base_cls = inner.canonical
            sum_cls = sum_with_a1(base_cls)
            if sum_cls.name not in _SUM_CACHE:
                _SUM_CACHE[sum_cls.name] = sum_cls
            T = [_lift(S, row) for row in inner.witness] + [z]
            return Identification(status="identified", label=sum_cls.name,
                                  parameter=inner.parameter,
                                  witness=T, canonical=sum_cls)
    if len(derived) == 2 and inv.derived_abelian and inv.center_dim == 0:
        return _identify_2a2(L, derived, catalog)
    return Identification(
        status="unidentified",
        reason="outside the encoded 4-dimensional classes "
               "(2A2 and sums with A1)")


_SUM_CACHE: Dict[str, CanonicalClass] = {}


def canonical_class_by_name(name: str) -> CanonicalClass:
    catalog = load_class_catalog()
    if name in catalog:
        return catalog[name]
    if name in _SUM_CACHE:
        return _SUM_CACHE[name]
    if name.endswith("+A1"):
        base = canonical_class_by_name(name[:-3])
        cls = sum_with_a1(base)
        _SUM_CACHE[cls.name] = cls
        return cls
    if name == "A2+2A1":
        cls = sum_with_a1(catalog["A2+A1"])
        _SUM_CACHE[cls.name] = cls
        return cls
    raise KeyError(name)


def _sub_algebra(L: LieAlgebra, rows: List[List[Fraction]]
                 ) -> Optional[LieAlgebra]:
    """Restriction of the bracket to span(rows), if closed."""
    k = len(rows)
    entries = {}
    for i in range(k):
        for j in range(i + 1, k):
            img = _bracket_rational(L, rows[i], rows[j])
            y = _in_span_coords(rows, img)
            if y is None:
                return None
            entries[(i, j)] = [rat(v) for v in y]
    return LieAlgebra.from_constants(k, entries, check_jacobi=False)


def _identify_2a2(L: LieAlgebra, derived: List[List[Fraction]],
                  catalog) -> Identification:
    comp = _complement(derived, 4)
    v1, v2 = comp[2], comp[3]
    M1 = _ad_on_subspace(L, v1, derived)
    M2 = _ad_on_subspace(L, v2, derived)
    if M1 is None or M2 is None:
        return Identification(status="unidentified",
                              reason="derived algebra is not an ideal")
    eig = _common_eigs(M1, M2)
    if eig is None:
        return Identification(
            status="unidentified",
            reason="no rational simultaneous eigenbasis on the derived "
                   "algebra")
    (w1, lam1), (w2, lam2) = eig
    f1 = _lift(derived, w1)
    f3 = _lift(derived, w2)
    # f2, f4 from the eigenvalue functionals: [f1,f2]=f1, [f3,f2]=0, etc.
    A = [[-lam1[0], -lam1[1]], [-lam2[0], -lam2[1]]]
    s2 = solve(A, [Fraction(1), Fraction(0)])
    s4 = solve(A, [Fraction(0), Fraction(1)])
    if s2 is None or s4 is None:
        return Identification(status="unidentified",
                              reason="degenerate eigenvalue functionals")
    f2 = [s2[0] * a + s2[1] * b for a, b in zip(v1, v2)]
    f4 = [s4[0] * a + s4[1] * b for a, b in zip(v1, v2)]
    # cancel the cross bracket [f2, f4] inside the derived algebra
    cross = _bracket_rational(L, f2, f4)
    y = _in_span_coords([f1, f3], cross)
    if y is None:
        return Identification(status="unidentified",
                              reason="cross bracket outside the eigenlines")
    rho1, rho3 = y
    f2 = [a - rho3 * b for a, b in zip(f2, f3)]
    f4 = [a + rho1 * b for a, b in zip(f4, f1)]
    return Identification(status="identified", label="2A2",
                          witness=[f1, f2, f3, f4], canonical=catalog["2A2"])


def _eigvec2(M: Matrix, lam: Fraction) -> List[Fraction]:
    rows = [[M[0][0] - lam, M[0][1]], [M[1][0], M[1][1] - lam]]
    vecs = nullspace(rows, 2)
    return vecs[0]


def _common_eigs(M1: Matrix, M2: Matrix):
    """Common rational eigenvectors of two commuting 2x2 matrices with their
    eigenvalue pairs, requiring two independent common lines."""
    tr = M1[0][0] + M1[1][1]
    det = M1[0][0] * M1[1][1] - M1[0][1] * M1[1][0]
    roots = _rational_roots_quadratic(tr, det)
    pairs = []
    if roots and roots[0] != roots[1]:
        for lam in roots:
            v = _eigvec2(M1, lam)
            mu = _apply2(M2, v)
            coef = _in_span_coords([v], mu)
            if coef is None:
                return None
            pairs.append((v, [lam, coef[0]]))
    else:
        # M1 proportional to identity; diagonalize M2 instead
        tr2 = M2[0][0] + M2[1][1]
        det2 = M2[0][0] * M2[1][1] - M2[0][1] * M2[1][0]
        roots2 = _rational_roots_quadratic(tr2, det2)
        if not roots2 or roots2[0] == roots2[1]:
            return None
        for lam in roots2:
            v = _eigvec2(M2, lam)
            mu = _apply2(M1, v)
            coef = _in_span_coords([v], mu)
            if coef is None:
                return None
            pairs.append((v, [coef[0], lam]))
    if len(pairs) != 2:
        return None
    return pairs[0], pairs[1]


def _apply2(M: Matrix, v: List[Fraction]) -> List[Fraction]:
    return [M[0][0] * v[0] + M[0][1] * v[1], M[1][0] * v[0] + M[1][1] * v[1]]
