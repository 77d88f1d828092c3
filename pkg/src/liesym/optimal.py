"""Adjoint representation, conjugacy of one-dimensional subalgebras, and
optimal systems for the encoded low-dimensional classes.

Strategy: an algebra is first identified (witness basis change to canonical
coordinates); in canonical coordinates every encoded class has an exact
classifier mapping a nonzero coefficient vector to its class representative
together with a witness word of adjoint steps.  Conjugacy of two vectors is
then signature equality, and the optimal system is the classifier's image.

The conjugacy quotient is the connected adjoint group, the line reflection
v -> -v, and the per-class discrete automorphisms declared in the catalog
(reflections for the diagonal solvable classes, the factor swap for 2A2).
Subalgebra classifications in the reference tables use the same quotient.

Witness parameters are exact rationals for shift steps; magnitude and angle
normalizations use floating parameters with the stated residual tolerance.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .expr import (
    EULER, Expr, ExprError, Rat, ZERO, ONE, add, mul, powx, rat, substitute,
    sym,
)
from .algebra import (
    CanonicalClass, Identification, LieAlgebra, canonical_class_by_name,
    identify,
)
from .linalg import Matrix, identity, inverse, matvec, nullspace


RESIDUAL_TOL = 1e-9
PARAM_TOL = 1e-9
DEFAULT_SEED = 20240901
DEFAULT_SAMPLES = 1000


class UnsupportedClassError(ExprError):
    pass


# ---------------------------------------------------------------------------
# adjoint matrices: exact closed form where the spectrum is rational
# ---------------------------------------------------------------------------

def _char_poly(M: Matrix) -> List[Fraction]:
    """Characteristic polynomial det(xI - M), coefficients low-to-high, by
    Faddeev-LeVerrier."""
    n = len(M)
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    Mk = identity(n)
    c = Fraction(1)
    from .linalg import matmul

    for k in range(1, n + 1):
        if k > 1:
            for i in range(n):
                Mk[i][i] += c
        Mk = matmul(M, Mk)
        c = -Fraction(1, k) * sum(Mk[i][i] for i in range(n))
        coeffs[n - k] = c
    return coeffs


def _divisors(n: int) -> List[int]:
    n = abs(n)
    out = []
    for d in range(1, n + 1):
        if d * d > n:
            break
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
    return sorted(out)


def _rational_roots(poly: List[Fraction]) -> Optional[Dict[Fraction, int]]:
    """All roots with multiplicity if the polynomial splits over Q."""
    from math import lcm

    cur = [Fraction(c) for c in poly]
    while cur and cur[-1] == 0:
        cur.pop()
    deg = len(cur) - 1
    roots: Dict[Fraction, int] = {}
    while len(cur) > 1:
        if cur[0] == 0:
            roots[Fraction(0)] = roots.get(Fraction(0), 0) + 1
            cur = cur[1:]
            continue
        den = 1
        for c in cur:
            den = lcm(den, c.denominator)
        ic = [int(c * den) for c in cur]
        found = None
        cands = set()
        for p in _divisors(ic[0]):
            for q in _divisors(ic[-1]):
                cands.add(Fraction(p, q))
                cands.add(Fraction(-p, q))
        for r in sorted(cands):
            val = Fraction(0)
            for c in reversed(cur):
                val = val * r + c
            if val == 0:
                found = r
                break
        if found is None:
            return None
        roots[found] = roots.get(found, 0) + 1
        # synthetic division by (x - found)
        out = [Fraction(0)] * (len(cur) - 1)
        acc = Fraction(0)
        for i in range(len(cur) - 1, 0, -1):
            acc = cur[i] + acc * found
            out[i - 1] = acc
        cur = out
    return roots if sum(roots.values()) == deg else None


def exact_expm(M: Matrix, eps: Expr) -> Optional[List[List[Expr]]]:
    """exp(eps*M) as exact expressions (polynomial and exponential entries in
    eps) when the spectrum is rational; None otherwise."""
    from .linalg import matmul

    n = len(M)
    roots = _rational_roots(_char_poly(M))
    if roots is None:
        return None
    cols: List[List[Fraction]] = []
    blocks: List[Tuple[Fraction, List[List[Fraction]]]] = []
    for lam, mu in sorted(roots.items()):
        B = [[M[i][j] - (lam if i == j else 0) for j in range(n)]
             for i in range(n)]
        Bp = identity(n)
        for _ in range(mu):
            Bp = matmul(B, Bp)
        basis = nullspace(Bp, n)
        for v in basis:
            # exp(eps M) v = e^(lam eps) * sum_k eps^k/k! B^k v
            chain = [v]
            w = v
            for _ in range(mu - 1):
                w = matvec(B, w)
                chain.append(w)
            blocks.append((lam, chain))
            cols.append(v)
    if len(cols) != n:
        return None
    P = [[cols[j][i] for j in range(n)] for i in range(n)]
    Pinv = inverse(P)
    if Pinv is None:
        return None
    # matrix whose column j is exp(eps M) applied to cols[j]
    exp_cols: List[List[Expr]] = []
    for lam, chain in blocks:
        phase = powx(EULER, mul(rat(lam), eps))
        col = [ZERO] * n
        for k, w in enumerate(chain):
            coef = mul(powx(eps, rat(k)), rat(Fraction(1, math.factorial(k))))
            for i in range(n):
                if w[i]:
                    col[i] = add(col[i], mul(coef, rat(w[i])))
        col = [mul(phase, entry) for entry in col]
        exp_cols.append(col)
    out = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            acc = ZERO
            for k in range(n):
                if Pinv[k][j]:
                    acc = add(acc, mul(exp_cols[k][i], rat(Pinv[k][j])))
            out[i][j] = acc
    return out


def _expm_np(A: np.ndarray) -> np.ndarray:
    """Scaling-and-squaring Taylor exponential, adequate for dim <= 4."""
    norm = np.max(np.abs(A)) if A.size else 0.0
    s = max(0, int(math.ceil(math.log2(norm + 1e-30))) + 2) if norm > 0.5 else 0
    B = A / (2 ** s)
    out = np.eye(A.shape[0])
    term = np.eye(A.shape[0])
    for k in range(1, 24):
        term = term @ B / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def ad_matrix_rational(L: LieAlgebra, i: int) -> Matrix:
    c = L.rational_constants()
    n = L.dim
    return [[c[i][j][k] for j in range(n)] for k in range(n)]


def adjoint_matrix(L: LieAlgebra, i: int,
                   eps: Union[Expr, Fraction, float, None] = None):
    """Ad(exp(eps ad e_i)): exact symbolic matrix when the spectrum of
    ad e_i is rational, else a numeric matrix at the instantiated eps."""
    M = ad_matrix_rational(L, i)
    if eps is None:
        eps = sym("eps")
    if isinstance(eps, (int, Fraction)):
        eps = rat(eps)
    if isinstance(eps, Expr):
        exact = exact_expm(M, eps)
        if exact is not None:
            return exact
        if isinstance(eps, Rat):
            return _expm_np(float(eps.value) * _np(M))
        raise ExprError("irrational spectrum: numeric adjoint needs a "
                        "numeric epsilon")
    return _expm_np(float(eps) * _np(M))


def _np(M: Matrix) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in M], dtype=float)


# ---------------------------------------------------------------------------
# subalgebra representatives, witnesses, signatures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamSpec:
    """One named free parameter with its admissible domain."""

    name: str
    kind: str = "any"        # any | nonzero | positive | unit-interval
    note: str = ""

    def admits(self, value) -> bool:
        v = float(value)
        if self.kind == "nonzero":
            return abs(v) > PARAM_TOL
        if self.kind == "positive":
            return v > PARAM_TOL
        if self.kind == "nonneg":
            return v >= -PARAM_TOL
        if self.kind == "unit-interval":
            return PARAM_TOL < abs(v) <= 1 + PARAM_TOL
        return True


@dataclass(frozen=True)
class SubalgebraRep:
    """One-dimensional subalgebra representative: a coefficient line over the
    algebra basis, possibly carrying free parameters."""

    coeffs: Tuple[Expr, ...]
    params: Tuple[ParamSpec, ...] = ()
    rep_id: str = ""
    note: str = ""

    def frozen(self) -> bool:
        return not self.params

    def instantiate(self, values: Dict[str, Fraction]) -> Tuple[Fraction, ...]:
        b = {k: rat(v) for k, v in values.items()}
        out = []
        for c in self.coeffs:
            v = substitute(c, b)
            if not isinstance(v, Rat):
                raise ExprError(f"cannot instantiate coefficient {c!r}")
            out.append(v.value)
        return tuple(out)

    def rational_coeffs(self) -> Optional[Tuple[Fraction, ...]]:
        if any(not isinstance(c, Rat) for c in self.coeffs):
            return None
        return tuple(c.value for c in self.coeffs)

    def render(self) -> str:
        from .dsl import render

        parts = []
        for i, c in enumerate(self.coeffs):
            if c.is_zero_literal:
                continue
            cs = render(c)
            if cs == "1":
                parts.append(f"e{i + 1}")
            elif cs == "-1":
                parts.append(f"-e{i + 1}")
            else:
                parts.append(f"({cs})*e{i + 1}")
        body = " + ".join(parts).replace("+ -", "- ") if parts else "0"
        if self.params:
            dom = ", ".join(f"{p.name} {p.kind}" for p in self.params)
            body += f"   [{dom}]"
        return body


@dataclass(frozen=True)
class Step:
    """One adjoint-word letter: exp of a basis direction or a declared
    discrete automorphism."""

    kind: str                 # "exp" | "aut"
    index: int = -1           # canonical basis index for exp steps
    name: str = ""            # automorphism name for aut steps
    epsilon: Union[Fraction, float, None] = None

    def inverse(self) -> "Step":
        if self.kind == "exp":
            return Step("exp", self.index, epsilon=-self.epsilon)
        return self  # the declared reflections and the swap are involutions


@dataclass
class ConjugacyWitness:
    steps: Tuple[Step, ...]
    scale: float
    residual: float

    def describe(self) -> str:
        parts = []
        for s in self.steps:
            if s.kind == "exp":
                parts.append(f"exp({s.epsilon}*ad e{s.index + 1})")
            else:
                parts.append(f"aut[{s.name}]")
        return " . ".join(parts) if parts else "identity"


@dataclass
class Signature:
    rep_id: str
    params: Dict[str, Union[Fraction, float]]
    steps: List[Step] = field(default_factory=list)
    scale: float = 1.0

    def matches(self, other: "Signature") -> bool:
        if self.rep_id != other.rep_id:
            return False
        if set(self.params) != set(other.params):
            return False
        for k, v in self.params.items():
            w = other.params[k]
            if isinstance(v, Fraction) and isinstance(w, Fraction):
                if v != w:
                    return False
            elif abs(float(v) - float(w)) > PARAM_TOL * max(1.0, abs(float(v))):
                return False
        return True

    def brief(self) -> str:
        if not self.params:
            return self.rep_id
        inner = ", ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.rep_id}({inner})"


@dataclass
class ConjugacyResult:
    verdict: str              # conjugate | not-conjugate | undecided
    witness: Optional[ConjugacyWitness] = None
    invariant: str = ""
    values: Tuple[str, str] = ("", "")

    @property
    def conjugate(self) -> bool:
        return self.verdict == "conjugate"

# ---------------------------------------------------------------------------
# per-class strategies in canonical coordinates
# ---------------------------------------------------------------------------

def _exp_step(i: int, eps) -> Step:
    return Step("exp", i, epsilon=eps)


def _aut_step(name: str) -> Step:
    return Step("aut", name=name)


def _sig(rep_id: str, params=None, steps=None, scale=1.0) -> Signature:
    return Signature(rep_id, params or {}, steps or [], scale)


def _first_nonzero(v: Sequence[Fraction]) -> int:
    for i, x in enumerate(v):
        if x != 0:
            return i
    raise ValueError("zero vector has no direction")


class Strategy:
    """Exact one-dimensional subalgebra classification for one canonical
    class.  classify() maps any nonzero rational coefficient vector to the
    signature of its class representative with a witness word."""

    name = ""

    def __init__(self, cls: CanonicalClass, a: Optional[Fraction] = None):
        self.cls = cls
        self.a = a

    def reps(self) -> List[SubalgebraRep]:
        raise NotImplementedError

    def classify(self, v: Sequence[Fraction]) -> Signature:
        raise NotImplementedError

    # vector orbits (used by direct sums with a central line); quotient is
    # the inner group, the class discretes, and the central flip
    def vector_reps(self) -> List[SubalgebraRep]:
        raise UnsupportedClassError(f"{self.cls.name}: no vector strategy")

    def vector_classify(self, v: Sequence[Fraction]) -> Signature:
        raise UnsupportedClassError(f"{self.cls.name}: no vector strategy")


def _unit_coeffs(n: int, entries: Dict[int, Expr]) -> Tuple[Expr, ...]:
    out = [ZERO] * n
    for i, e in entries.items():
        out[i] = e
    return tuple(out)


class AbelianStrategy(Strategy):
    """Trivial adjoint group: classes are projective normal forms, reported
    as parameterized families."""

    def reps(self) -> List[SubalgebraRep]:
        n = self.cls.dim
        out = []
        for k in range(n):
            entries = {k: ONE}
            params = []
            for j in range(k + 1, n):
                pname = f"a{j + 1}"
                entries[j] = sym(pname)
                params.append(ParamSpec(pname, "any"))
            out.append(SubalgebraRep(_unit_coeffs(n, entries), tuple(params),
                                     rep_id=f"e{k + 1}-normal"))
        return out

    def classify(self, v):
        k = _first_nonzero(v)
        params = {f"a{j + 1}": v[j] / v[k] for j in range(k + 1, len(v))}
        return _sig(f"e{k + 1}-normal", params, [], float(v[k]))


class A2Strategy(Strategy):
    def reps(self):
        return [SubalgebraRep(_unit_coeffs(2, {0: ONE}), rep_id="e1"),
                SubalgebraRep(_unit_coeffs(2, {1: ONE}), rep_id="e2")]

    def classify(self, v):
        c1, c2 = v
        if c2 != 0:
            return _sig("e2", {}, [_exp_step(0, -c1 / c2)], float(c2))
        return _sig("e1", {}, [], float(c1))


class A2A1Strategy(Strategy):
    """A2 + A1 with the reflection e1 -> -e1 in the quotient."""

    def reps(self):
        return [
            SubalgebraRep(_unit_coeffs(3, {1: ONE, 2: sym("d")}),
                          (ParamSpec("d", "any"),), rep_id="e2+d*e3"),
            SubalgebraRep(_unit_coeffs(3, {0: ONE, 2: ONE}), rep_id="e1+e3"),
            SubalgebraRep(_unit_coeffs(3, {0: ONE}), rep_id="e1"),
            SubalgebraRep(_unit_coeffs(3, {2: ONE}), rep_id="e3"),
        ]

    def classify(self, v):
        c1, c2, c3 = v
        if c2 != 0:
            return _sig("e2+d*e3", {"d": c3 / c2},
                        [_exp_step(0, -c1 / c2)], float(c2))
        if c1 != 0 and c3 != 0:
            steps = []
            r = c1 / c3
            if r < 0:
                steps.append(_aut_step("R1"))
                r = -r
            steps.append(_exp_step(1, math.log(float(r))))
            return _sig("e1+e3", {}, steps, float(c3))
        if c1 != 0:
            return _sig("e1", {}, [], float(c1))
        return _sig("e3", {}, [], float(c3))

    def vector_reps(self):
        return [
            SubalgebraRep(_unit_coeffs(3, {1: sym("b"), 2: sym("d")}),
                          (ParamSpec("b", "positive"), ParamSpec("d", "any")),
                          rep_id="v:e2"),
            SubalgebraRep(_unit_coeffs(3, {0: ONE, 2: sym("d")}),
                          (ParamSpec("d", "nonneg"),), rep_id="v:e1"),
            SubalgebraRep(_unit_coeffs(3, {2: sym("d")}),
                          (ParamSpec("d", "positive"),), rep_id="v:e3"),
        ]

    def vector_classify(self, v):
        c1, c2, c3 = v
        if c2 != 0:
            steps = [_exp_step(0, -c1 / c2)]
            if c2 < 0:
                steps.append(_aut_step("Z-flip"))
                return _sig("v:e2", {"b": -c2, "d": -c3}, steps)
            return _sig("v:e2", {"b": c2, "d": c3}, steps)
        if c1 != 0:
            steps = []
            if c1 < 0:
                steps.append(_aut_step("R1"))
                c1 = -c1
            if c3 < 0:
                steps.append(_aut_step("Z-flip"))
                steps.append(_aut_step("R1"))
                c3 = -c3
            steps.append(_exp_step(1, math.log(float(c1))))
            return _sig("v:e1", {"d": c3}, steps)
        steps = []
        if c3 < 0:
            steps.append(_aut_step("Z-flip"))
            c3 = -c3
        return _sig("v:e3", {"d": c3}, steps)


class A31Strategy(Strategy):
    def reps(self):
        return [
            SubalgebraRep(_unit_coeffs(3, {1: ONE, 2: sym("d")}),
                          (ParamSpec("d", "any"),), rep_id="e2+d*e3"),
            SubalgebraRep(_unit_coeffs(3, {2: ONE}), rep_id="e3"),
            SubalgebraRep(_unit_coeffs(3, {0: ONE}), rep_id="e1"),
        ]

    def classify(self, v):
        c1, c2, c3 = v
        if c2 != 0:
            return _sig("e2+d*e3", {"d": c3 / c2},
                        [_exp_step(2, c1 / c2)], float(c2))
        if c3 != 0:
            return _sig("e3", {}, [_exp_step(1, -c1 / c3)], float(c3))
        return _sig("e1", {}, [], float(c1))

    def vector_reps(self):
        return [
            SubalgebraRep(_unit_coeffs(3, {1: sym("b"), 2: sym("d")}),
                          (ParamSpec("b", "positive"), ParamSpec("d", "any")),
                          rep_id="v:e2"),
            SubalgebraRep(_unit_coeffs(3, {2: sym("d")}),
                          (ParamSpec("d", "positive"),), rep_id="v:e3"),
            SubalgebraRep(_unit_coeffs(3, {0: sym("b")}),
                          (ParamSpec("b", "positive"),), rep_id="v:e1"),
        ]

    def vector_classify(self, v):
        c1, c2, c3 = v
        if c2 != 0:
            steps = [_exp_step(2, c1 / c2)]
            if c2 < 0:
                steps.append(_aut_step("Z-flip"))
                return _sig("v:e2", {"b": -c2, "d": -c3}, steps)
            return _sig("v:e2", {"b": c2, "d": c3}, steps)
        if c3 != 0:
            steps = [_exp_step(1, -c1 / c3)]
            if c3 < 0:
                steps.append(_aut_step("Z-flip"))
                c3 = -c3
            return _sig("v:e3", {"d": c3}, steps)
        steps = []
        if c1 < 0:
            steps.append(_aut_step("Z-flip"))
            c1 = -c1
        return _sig("v:e1", {"b": c1}, steps)


class A32Strategy(Strategy):
    def reps(self):
        return [SubalgebraRep(_unit_coeffs(3, {2: ONE}), rep_id="e3"),
                SubalgebraRep(_unit_coeffs(3, {1: ONE}), rep_id="e2"),
                SubalgebraRep(_unit_coeffs(3, {0: ONE}), rep_id="e1")]

    def classify(self, v):
        c1, c2, c3 = v
        if c3 != 0:
            e2s = -c2 / c3
            c1b = c1 + e2s * c3   # e2 step shifts both c1 and c2 by eps*c3
            return _sig("e3", {}, [_exp_step(1, e2s),
                                   _exp_step(0, -c1b / c3)], float(c3))
        if c2 != 0:
            return _sig("e2", {}, [_exp_step(2, c1 / c2)],
                        float(c2) * math.exp(-float(c1 / c2)))
        return _sig("e1", {}, [], float(c1))

    def vector_reps(self):
        return [
            SubalgebraRep(_unit_coeffs(3, {2: sym("d")}),
                          (ParamSpec("d", "positive"),), rep_id="v:e3"),
            SubalgebraRep(_unit_coeffs(3, {1: sym("b")}),
                          (ParamSpec("b", "positive"),), rep_id="v:e2"),
            SubalgebraRep(_unit_coeffs(3, {0: ONE}), rep_id="v:e1"),
        ]

    def vector_classify(self, v):
        c1, c2, c3 = v
        if c3 != 0:
            e2s = -c2 / c3
            c1b = c1 + e2s * c3
            steps = [_exp_step(1, e2s), _exp_step(0, -c1b / c3)]
            if c3 < 0:
                steps.append(_aut_step("Z-flip"))
                c3 = -c3
            return _sig("v:e3", {"d": c3}, steps)
        if c2 != 0:
            steps = [_exp_step(2, c1 / c2)]
            b = float(c2) * math.exp(-float(c1 / c2))
            if b < 0:
                steps.append(_aut_step("Z-flip"))
                b = -b
            return _sig("v:e2", {"b": b}, steps)
        steps = [_exp_step(2, math.log(abs(float(c1))))]
        if c1 < 0:
            steps.append(_aut_step("Z-flip"))
        return _sig("v:e1", {}, steps)


class A33Strategy(Strategy):
    def reps(self):
        return [
            SubalgebraRep(_unit_coeffs(3, {2: ONE}), rep_id="e3"),
            SubalgebraRep(_unit_coeffs(3, {0: ONE, 1: sym("d")}),
                          (ParamSpec("d", "any"),), rep_id="e1+d*e2"),
            SubalgebraRep(_unit_coeffs(3, {1: ONE}), rep_id="e2"),
        ]

    def classify(self, v):
        c1, c2, c3 = v
        if c3 != 0:
            return _sig("e3", {}, [_exp_step(0, -c1 / c3),
                                   _exp_step(1, -c2 / c3)], float(c3))
        if c1 != 0:
            return _sig("e1+d*e2", {"d": c2 / c1}, [], float(c1))
        return _sig("e2", {}, [], float(c2))

    def vector_reps(self):
        return [
            SubalgebraRep(_unit_coeffs(3, {2: sym("d")}),
                          (ParamSpec("d", "positive"),), rep_id="v:e3"),
            SubalgebraRep(_unit_coeffs(3, {0: ONE, 1: sym("d")}),
                          (ParamSpec("d", "any"),), rep_id="v:e1"),
            SubalgebraRep(_unit_coeffs(3, {1: ONE}), rep_id="v:e2"),
        ]

    def vector_classify(self, v):
        c1, c2, c3 = v
        if c3 != 0:
            steps = [_exp_step(0, -c1 / c3), _exp_step(1, -c2 / c3)]
            if c3 < 0:
                steps.append(_aut_step("Z-flip"))
                c3 = -c3
            return _sig("v:e3", {"d": c3}, steps)
        if c1 != 0:
            steps = []
            if c1 < 0:
                steps.append(_aut_step("Z-flip"))
                c1, c2 = -c1, -c2
            steps.append(_exp_step(2, math.log(float(c1))))
            return _sig("v:e1", {"d": c2 / c1}, steps)
        steps = []
        if c2 < 0:
            steps.append(_aut_step("Z-flip"))
            c2 = -c2
        steps.append(_exp_step(2, math.log(float(c2))))
        return _sig("v:e2", {}, steps)


class _DiagonalStrategy(Strategy):
    """Shared classifier for A3,4 (a = -1) and A3,5^a (0 < |a| < 1): the
    adjoint scaling is diag(e^-eps, e^-a*eps) with the reflection R2 in the
    quotient."""

    @property
    def _a(self) -> Fraction:
        return Fraction(-1) if self.cls.name == "A3,4" else self.a

    def reps(self):
        return [
            SubalgebraRep(_unit_coeffs(3, {2: ONE}), rep_id="e3"),
            SubalgebraRep(_unit_coeffs(3, {0: ONE}), rep_id="e1"),
            SubalgebraRep(_unit_coeffs(3, {1: ONE}), rep_id="e2"),
            SubalgebraRep(_unit_coeffs(3, {0: ONE, 1: ONE}), rep_id="e1+e2"),
        ]

    def classify(self, v):
        a = self._a
        c1, c2, c3 = v
        if c3 != 0:
            return _sig("e3", {}, [_exp_step(0, -c1 / c3),
                                   _exp_step(1, -c2 / (a * c3))], float(c3))
        if c1 != 0 and c2 != 0:
            steps = []
            if c1 < 0:
                c1, c2 = -c1, -c2  # projective sign flip
            if c2 < 0:
                steps.append(_aut_step("R2"))
                c2 = -c2
            eps = math.log(float(c2 / c1)) / (float(a) - 1.0)
            steps.append(_exp_step(2, eps))
            return _sig("e1+e2", {}, steps,
                        float(c1) * math.exp(-eps))
        if c1 != 0:
            return _sig("e1", {}, [], float(c1))
        return _sig("e2", {}, [], float(c2))

    def vector_reps(self):
        return [
            SubalgebraRep(_unit_coeffs(3, {2: sym("d")}),
                          (ParamSpec("d", "positive"),), rep_id="v:e3"),
            SubalgebraRep(_unit_coeffs(3, {0: ONE, 1: sym("q")}),
                          (ParamSpec("q", "positive"),), rep_id="v:hyp"),
            SubalgebraRep(_unit_coeffs(3, {0: ONE}), rep_id="v:e1"),
            SubalgebraRep(_unit_coeffs(3, {1: ONE}), rep_id="v:e2"),
        ]

    def vector_classify(self, v):
        a = self._a
        c1, c2, c3 = v
        if c3 != 0:
            steps = [_exp_step(0, -c1 / c3), _exp_step(1, -c2 / (a * c3))]
            if c3 < 0:
                steps.append(_aut_step("Z-flip"))
                c3 = -c3
            return _sig("v:e3", {"d": c3}, steps)
        if c1 != 0 and c2 != 0:
            steps = []
            if c1 < 0:
                steps.append(_aut_step("Z-flip"))
                c1, c2 = -c1, -c2
            if c2 < 0:
                steps.append(_aut_step("R2"))
                c2 = -c2
            eps = math.log(float(c1))
            steps.append(_exp_step(2, eps))
            # after scaling c1 -> 1, the second slot is c2*c1^(-a)
            q = float(c2) * float(c1) ** (-float(a))
            return _sig("v:hyp", {"q": q}, steps)
        if c1 != 0:
            steps = []
            if c1 < 0:
                steps.append(_aut_step("Z-flip"))
                c1 = -c1
            steps.append(_exp_step(2, math.log(float(c1))))
            return _sig("v:e1", {}, steps)
        steps = []
        if c2 < 0:
            steps.append(_aut_step("R2"))
            c2 = -c2
        steps.append(_exp_step(2, math.log(float(c2)) / float(a)))
        return _sig("v:e2", {}, steps)


class A34Strategy(_DiagonalStrategy):
    def vector_classify(self, v):
        # the hyperbolic invariant c1*c2 is exact for a = -1
        a = self._a
        c1, c2, c3 = v
        if c3 == 0 and c1 != 0 and c2 != 0:
            steps = []
            if c1 < 0:
                steps.append(_aut_step("Z-flip"))
                c1, c2 = -c1, -c2
            if c2 < 0:
                steps.append(_aut_step("R2"))
                c2 = -c2
            steps.append(_exp_step(2, math.log(float(c1))))
            return _sig("v:hyp", {"q": c1 * c2}, steps)
        return super().vector_classify(v)


class A35Strategy(_DiagonalStrategy):
    pass


class _RotationStrategy(Strategy):
    """A3,6 (pure rotation) and A3,7^a (spiral, a > 0)."""

    @property
    def _a(self) -> float:
        return 0.0 if self.cls.name == "A3,6" else float(self.a)

    def reps(self):
        return [SubalgebraRep(_unit_coeffs(3, {2: ONE}), rep_id="e3"),
                SubalgebraRep(_unit_coeffs(3, {0: ONE}), rep_id="e1")]

    def _kill_plane(self, c1, c2, c3) -> List[Step]:
        if self.cls.name == "A3,6":
            # e1 shifts c2 by -eps*c3, e2 shifts c1 by +eps*c3
            return [_exp_step(1, -c1 / c3), _exp_step(0, c2 / c3)]
        a = self.a
        det = a * a + 1
        # shifts: e1 adds (a, -1)*eps*c3, e2 adds (1, a)*eps*c3; solve
        # [a 1; -1 a] (s1, s2) = -(c1, c2)/c3
        s1 = (c2 - a * c1) / det / c3
        s2 = (-c1 - a * c2) / det / c3
        return [_exp_step(0, s1), _exp_step(1, s2)]

    def classify(self, v):
        c1, c2, c3 = v
        if c3 != 0:
            return _sig("e3", {}, self._kill_plane(c1, c2, c3), float(c3))
        theta = math.atan2(float(c2), float(c1))
        r = math.hypot(float(c1), float(c2))
        scale = r * math.exp(-self._a * theta)
        return _sig("e1", {}, [_exp_step(2, -theta)], scale)

    def vector_reps(self):
        if self.cls.name == "A3,6":
            plane = SubalgebraRep(_unit_coeffs(3, {0: sym("r")}),
                                  (ParamSpec("r", "positive"),),
                                  rep_id="v:plane")
        else:
            plane = SubalgebraRep(_unit_coeffs(3, {0: sym("r")}),
                                  (ParamSpec("r", "positive",
                                             "windowed spiral radius"),),
                                  rep_id="v:plane")
        return [SubalgebraRep(_unit_coeffs(3, {2: sym("d")}),
                              (ParamSpec("d", "positive"),), rep_id="v:e3"),
                plane]

    def vector_classify(self, v):
        c1, c2, c3 = v
        if c3 != 0:
            steps = self._kill_plane(c1, c2, c3)
            if c3 < 0:
                steps.append(_aut_step("Z-flip"))
                c3 = -c3
            return _sig("v:e3", {"d": c3}, steps)
        theta = math.atan2(float(c2), float(c1))
        r = math.hypot(float(c1), float(c2)) * math.exp(-self._a * theta)
        steps = [_exp_step(2, -theta)]
        a = self._a
        if a > 0:
            # reduce the radius into [1, e^(pi a)); a flip is a rotation by pi
            period = math.pi * a
            k = math.floor(math.log(r) / period)
            r = r * math.exp(-k * period)
            steps.append(_exp_step(2, -k * math.pi))
        return _sig("v:plane", {"r": r}, steps)


class A36Strategy(_RotationStrategy):
    def vector_classify(self, v):
        c1, c2, c3 = v
        if c3 == 0:
            r = math.hypot(float(c1), float(c2))
            theta = math.atan2(float(c2), float(c1))
            return _sig("v:plane", {"r": r}, [_exp_step(2, -theta)])
        return super().vector_classify(v)


class A37Strategy(_RotationStrategy):
    pass


class A38Strategy(Strategy):
    """sl(2, R): sign of the invariant quadratic form Q = c2^2 + 4 c1 c3."""

    def reps(self):
        return [
            SubalgebraRep(_unit_coeffs(3, {1: ONE}), rep_id="e2",
                          note="Q > 0 (hyperbolic)"),
            SubalgebraRep(_unit_coeffs(3, {0: ONE}), rep_id="e1",
                          note="Q = 0 (nilpotent)"),
            SubalgebraRep(_unit_coeffs(3, {0: ONE, 2: MINUS_ONE_EXPR}),
                          rep_id="e1-e3", note="Q < 0 (elliptic)"),
        ]

    @staticmethod
    def _q(v) -> Fraction:
        return v[1] * v[1] + 4 * v[0] * v[2]

    @staticmethod
    def _ad_e1(vv, eps):
        c1, c2, c3 = vv
        return (c1 + eps * c2 - eps * eps * c3, c2 - 2 * eps * c3, c3)

    @staticmethod
    def _ad_e3(vv, eps):
        c1, c2, c3 = vv
        return (c1, c2 + 2 * eps * c1, c3 - eps * c2 - eps * eps * c1)

    def classify(self, v):
        q = self._q(v)
        vv = tuple(v)
        steps: List[Step] = []
        if q > 0:
            if vv[2] != 0:
                disc = q
                root = _exact_sqrt(disc)
                if root is not None:
                    delta = (-vv[1] + root) / (2 * vv[0]) if vv[0] != 0 \
                        else vv[2] / vv[1]
                else:
                    delta = (-float(vv[1]) + math.sqrt(float(disc))) / \
                        (2 * float(vv[0])) if vv[0] != 0 else float(vv[2] / vv[1])
                # a root of c3 - d c2 - d^2 c1 kills the third slot
                dval = delta
                steps.append(_exp_step(2, dval))
                vv = self._ad_e3_any(vv, dval)
            if vv[0] != 0:
                epsv = -vv[0] / vv[1]
                steps.append(_exp_step(0, epsv))
                vv = self._ad_e1_any(vv, epsv)
            return _sig("e2", {}, steps, float(vv[1]))
        if q == 0:
            if vv[2] != 0:
                if vv[0] != 0:
                    dval = -vv[1] / (2 * vv[0])
                    steps.append(_exp_step(2, dval))
                    vv = self._ad_e3(vv, dval)
                else:
                    # c2 = 0 here; rotate the e3 line onto the e1 line
                    steps.append(_exp_step(0, Fraction(1)))
                    vv = self._ad_e1(vv, Fraction(1))
                    dval = Fraction(-1)
                    steps.append(_exp_step(2, dval))
                    vv = self._ad_e3(vv, dval)
            return _sig("e1", {}, steps, float(vv[0]))
        # q < 0: c1 != 0 is guaranteed
        dval = -vv[1] / (2 * vv[0])
        steps.append(_exp_step(2, dval))
        vv = self._ad_e3(vv, dval)
        s2 = -float(vv[2]) / float(vv[0])
        beta = -0.5 * math.log(s2)
        steps.append(_exp_step(1, beta))
        scale = float(vv[0]) * math.exp(-beta)
        return _sig("e1-e3", {}, steps, scale)

    def _ad_e3_any(self, vv, d):
        if isinstance(d, Fraction):
            return self._ad_e3(vv, d)
        c1, c2, c3 = (float(x) for x in vv)
        return (c1, c2 + 2 * d * c1, c3 - d * c2 - d * d * c1)

    def _ad_e1_any(self, vv, e):
        if isinstance(e, Fraction) and all(isinstance(x, Fraction) for x in vv):
            return self._ad_e1(vv, e)
        c1, c2, c3 = (float(x) for x in vv)
        e = float(e)
        return (c1 + e * c2 - e * e * c3, c2 - 2 * e * c3, c3)

    def vector_reps(self):
        return [
            SubalgebraRep(_unit_coeffs(3, {1: sym("b")}),
                          (ParamSpec("b", "positive"),), rep_id="v:hyp"),
            SubalgebraRep(_unit_coeffs(3, {0: ONE}), rep_id="v:nil"),
            SubalgebraRep(_unit_coeffs(3, {0: sym("b"), 2: mul(-1, sym("b"))}),
                          (ParamSpec("b", "positive"),), rep_id="v:ell"),
        ]

    def vector_classify(self, v):
        q = self._q(v)
        line = self.classify(v)
        steps = list(line.steps)
        if q > 0:
            b = math.sqrt(float(q))
            if line.scale < 0:
                steps.append(_aut_step("Z-flip"))
            return _sig("v:hyp", {"b": b}, steps)
        if q == 0:
            if line.scale < 0:
                steps.append(_aut_step("Z-flip"))
            steps.append(_exp_step(1, math.log(abs(line.scale))))
            return _sig("v:nil", {}, steps)
        b = math.sqrt(-float(q)) / 2
        if line.scale < 0:
            steps.append(_aut_step("Z-flip"))
        return _sig("v:ell", {"b": b}, steps)


class A39Strategy(Strategy):
    def reps(self):
        return [SubalgebraRep(_unit_coeffs(3, {0: ONE}), rep_id="e1")]

    def classify(self, v):
        c = [float(x) for x in v]
        # rotate around e3 to kill c2, then around e2 to kill c3
        t1 = math.atan2(c[1], c[0])
        c1 = math.hypot(c[0], c[1])
        t2 = math.atan2(c[2], c1)
        r = math.hypot(c1, c[2])
        return _sig("e1", {}, [_exp_step(2, -t1), _exp_step(1, t2)], r)

    def vector_reps(self):
        return [SubalgebraRep(_unit_coeffs(3, {0: sym("r")}),
                              (ParamSpec("r", "positive"),), rep_id="v:e1")]

    def vector_classify(self, v):
        line = self.classify(v)
        return _sig("v:e1", {"r": abs(line.scale)}, list(line.steps))


class TwoA2Strategy(Strategy):
    """2A2 with the factor swap in the quotient: seven classes, one with an
    arbitrary nonzero parameter."""

    def reps(self):
        return [
            SubalgebraRep(_unit_coeffs(4, {1: ONE, 3: sym("a")}),
                          (ParamSpec("a", "unit-interval",
                                     "arbitrary nonzero; |a|<=1 after the "
                                     "factor swap a <-> 1/a"),),
                          rep_id="e2+a*e4"),
            SubalgebraRep(_unit_coeffs(4, {1: ONE}), rep_id="e2"),
            SubalgebraRep(_unit_coeffs(4, {1: ONE, 2: ONE}), rep_id="e2+e3"),
            SubalgebraRep(_unit_coeffs(4, {1: ONE, 2: MINUS_ONE_EXPR}),
                          rep_id="e2-e3"),
            SubalgebraRep(_unit_coeffs(4, {0: ONE}), rep_id="e1"),
            SubalgebraRep(_unit_coeffs(4, {0: ONE, 2: ONE}), rep_id="e1+e3"),
            SubalgebraRep(_unit_coeffs(4, {0: ONE, 2: MINUS_ONE_EXPR}),
                          rep_id="e1-e3"),
        ]

    def classify(self, v):
        c1, c2, c3, c4 = v
        steps: List[Step] = []
        if (c2 == 0 and c4 != 0) or (c2 == 0 == c4 and c1 == 0 and c3 != 0) \
                or (c2 != 0 and c4 != 0 and abs(c4) > abs(c2)):
            steps.append(_aut_step("S"))
            c1, c2, c3, c4 = c3, c4, c1, c2
        if c2 != 0 and c4 != 0:
            steps.append(_exp_step(0, -c1 / c2))
            steps.append(_exp_step(2, -c3 / c4))
            return _sig("e2+a*e4", {"a": c4 / c2}, steps, float(c2))
        if c2 != 0:
            steps.append(_exp_step(0, -c1 / c2))
            if c3 == 0:
                return _sig("e2", {}, steps, float(c2))
            s = 1 if (c3 > 0) == (c2 > 0) else -1
            eps = math.log(abs(float(c3 / c2)))
            steps.append(_exp_step(3, eps))
            return _sig("e2+e3" if s > 0 else "e2-e3", {}, steps, float(c2))
        # c2 = c4 = 0
        if c1 != 0 and c3 != 0:
            s = 1 if (c1 > 0) == (c3 > 0) else -1
            eps = math.log(abs(float(c1 / c3)))
            steps.append(_exp_step(1, eps))
            return _sig("e1+e3" if s > 0 else "e1-e3", {}, steps, float(c3))
        return _sig("e1", {}, steps, float(c1 if c1 != 0 else c3))


class SumA1Strategy(Strategy):
    """X + A1: lines with zero central part inherit X's classes; lines with
    a central component are classified by X's vector orbits."""

    def __init__(self, cls: CanonicalClass, base: Strategy):
        super().__init__(cls, base.a)
        self.base = base

    def reps(self):
        n = self.cls.dim
        out = []
        for r in self.base.reps():
            out.append(SubalgebraRep(tuple(list(r.coeffs) + [ZERO]),
                                     r.params, rep_id="L:" + r.rep_id,
                                     note=r.note))
        for r in self.base.vector_reps():
            out.append(SubalgebraRep(tuple(list(r.coeffs) + [ONE]),
                                     r.params, rep_id="S:" + r.rep_id,
                                     note=r.note))
        out.append(SubalgebraRep(_unit_coeffs(n, {n - 1: ONE}),
                                 rep_id="S:zero"))
        return out

    def classify(self, v):
        c4 = v[-1]
        if c4 == 0:
            inner = self.base.classify(v[:-1])
            return _sig("L:" + inner.rep_id, inner.params, inner.steps,
                        inner.scale)
        vx = tuple(x / c4 for x in v[:-1])
        if not any(vx):
            return _sig("S:zero", {}, [], float(c4))
        inner = self.base.vector_classify(vx)
        return _sig("S:" + inner.rep_id, inner.params, inner.steps, float(c4))


MINUS_ONE_EXPR = mul(-1, ONE)


def _exact_sqrt(q: Fraction) -> Optional[Fraction]:
    if q < 0:
        return None
    from .expr import _int_nth_root

    rn = _int_nth_root(q.numerator, 2)
    rd = _int_nth_root(q.denominator, 2)
    if rn is None or rd is None:
        return None
    return Fraction(rn, rd)


_STRATEGIES = {
    "A1": AbelianStrategy,
    "2A1": AbelianStrategy,
    "3A1": AbelianStrategy,
    "4A1": AbelianStrategy,
    "A2": A2Strategy,
    "A2+A1": A2A1Strategy,
    "A3,1": A31Strategy,
    "A3,2": A32Strategy,
    "A3,3": A33Strategy,
    "A3,4": A34Strategy,
    "A3,5": A35Strategy,
    "A3,6": A36Strategy,
    "A3,7": A37Strategy,
    "A3,8": A38Strategy,
    "A3,9": A39Strategy,
    "2A2": TwoA2Strategy,
}


def strategy_for(name: str, a: Optional[Fraction] = None) -> Strategy:
    if name in _STRATEGIES:
        cls = canonical_class_by_name(name)
        return _STRATEGIES[name](cls, a)
    if name == "A2+2A1":
        base = strategy_for("A2+A1")
        return SumA1Strategy(canonical_class_by_name("A2+2A1"), base)
    if name.endswith("+A1"):
        base = strategy_for(name[:-3], a)
        return SumA1Strategy(canonical_class_by_name(name), base)
    raise UnsupportedClassError(
        f"no optimal-system strategy for class {name}")

# ---------------------------------------------------------------------------
# algebra-level operations through the identification witness
# ---------------------------------------------------------------------------

@dataclass
class ClassifiedAlgebra:
    """An algebra together with its identification and strategy; all
    classification happens in the canonical coordinates of the witness."""

    L: LieAlgebra
    ident: Identification
    strategy: Strategy
    to_canonical: Matrix      # solves canonical coords from algebra coords
    from_canonical: Matrix    # T^t: canonical rep -> algebra coords

    @classmethod
    def build(cls, L: LieAlgebra,
              ident: Optional[Identification] = None) -> "ClassifiedAlgebra":
        if ident is None:
            ident = identify(L)
        if ident.status != "identified":
            raise UnsupportedClassError(
                f"algebra not identified: {ident.reason}")
        strategy = strategy_for(ident.label, ident.parameter)
        T = ident.witness
        n = L.dim
        Tt = [[T[i][j] for i in range(n)] for j in range(n)]
        Tt_inv = inverse(Tt)
        if Tt_inv is None:
            raise ExprError("singular identification witness")
        return cls(L=L, ident=ident, strategy=strategy,
                   to_canonical=Tt_inv, from_canonical=Tt)

    def canonical_coords(self, v: Sequence[Fraction]) -> List[Fraction]:
        return matvec(self.to_canonical, list(v))

    def algebra_coords(self, c: Sequence) -> List[Expr]:
        out: List[Expr] = [ZERO] * self.L.dim
        for i, ci in enumerate(c):
            ce = ci if isinstance(ci, Expr) else rat(ci)
            for j in range(self.L.dim):
                if self.from_canonical[j][i]:
                    out[j] = add(out[j], mul(rat(self.from_canonical[j][i]), ce))
        return out

    def classify(self, v: Sequence[Fraction]) -> Signature:
        return self.strategy.classify(self.canonical_coords(v))


def _normalize_leading(coeffs: List[Expr]) -> Tuple[Expr, ...]:
    """Scale so the first nonzero rational coefficient is +-1 with positive
    sign preferred (subalgebra representatives are lines)."""
    lead = None
    for c in coeffs:
        if isinstance(c, Rat) and c.value != 0:
            lead = c.value
            break
        if not isinstance(c, Rat) and not c.is_zero_literal:
            break
    if lead is None or abs(lead) == 1:
        if lead == -1:
            return tuple(mul(-1, c) for c in coeffs)
        return tuple(coeffs)
    inv = rat(Fraction(1, 1) / abs(lead))
    out = [mul(inv, c) for c in coeffs]
    if lead < 0:
        out = [mul(-1, c) for c in out]
    return tuple(out)


def construct_optimal_system(L: LieAlgebra,
                             ident: Optional[Identification] = None
                             ) -> List[SubalgebraRep]:
    """Representatives of the one-dimensional subalgebra classes under the
    adjoint group (with the declared discrete quotient), in the algebra's
    own basis.  Parameter families stay symbolic."""
    ca = ClassifiedAlgebra.build(L, ident)
    out = []
    for rep in ca.strategy.reps():
        coeffs = _normalize_leading(ca.algebra_coords(rep.coeffs))
        out.append(SubalgebraRep(coeffs, rep.params, rep.rep_id, rep.note))
    return out


def _steps_inverse(steps: Sequence[Step]) -> List[Step]:
    return [s.inverse() for s in reversed(steps)]


def apply_steps_numeric(cls: CanonicalClass, a: Optional[Fraction],
                        steps: Sequence[Step], v: Sequence) -> np.ndarray:
    """Apply an adjoint word numerically in canonical coordinates."""
    alg = cls.instantiated(a)
    discretes = cls.discrete_maps()
    x = np.array([float(t) for t in v], dtype=float)
    for s in steps:
        if s.kind == "exp":
            M = _np(ad_matrix_rational(alg, s.index))
            x = _expm_np(float(s.epsilon) * M) @ x
        else:
            D = _np(discretes[s.name])
            x = D @ x
    return x


def projective_residual(x: np.ndarray, y: np.ndarray) -> float:
    nx = np.linalg.norm(x)
    ny = np.linalg.norm(y)
    if nx == 0 or ny == 0:
        return float(max(nx, ny))
    x = x / nx
    y = y / ny
    return float(min(np.linalg.norm(x - y), np.linalg.norm(x + y)))


def witness_from_steps(ca: ClassifiedAlgebra, steps: Sequence[Step],
                       v: Sequence[Fraction], w: Sequence[Fraction]
                       ) -> ConjugacyWitness:
    """Package a word mapping v onto the line of w, with its numeric
    residual."""
    cv = ca.canonical_coords(v)
    cw = ca.canonical_coords(w)
    x = apply_steps_numeric(ca.strategy.cls, ca.strategy.a, steps, cv)
    res = projective_residual(x, np.array([float(t) for t in cw]))
    nx = float(np.linalg.norm(x))
    nw = float(np.linalg.norm([float(t) for t in cw]))
    scale = nx / nw if nw else 0.0
    return ConjugacyWitness(tuple(steps), scale, res)


def are_conjugate(L: LieAlgebra, v: Sequence[Fraction],
                  w: Sequence[Fraction],
                  ident: Optional[Identification] = None) -> ConjugacyResult:
    """Conjugacy of the lines spanned by v and w under the adjoint group
    extended by the declared discrete automorphisms.

    For identified algebras the canonical classifier is a complete invariant:
    equal signatures give a composed witness word, different signatures give
    a NotConjugate verdict carrying the separating invariant.  Unidentified
    algebras fall back to invariant rejection plus a bounded numeric witness
    search."""
    if not any(v) or not any(w):
        raise ValueError("zero vector spans no subalgebra")
    try:
        ca = ClassifiedAlgebra.build(L, ident)
    except (UnsupportedClassError, ExprError):
        return _are_conjugate_generic(L, v, w)
    sv = ca.classify(v)
    sw = ca.classify(w)
    if sv.matches(sw):
        steps = [s for s in list(sv.steps) + _steps_inverse(sw.steps)
                 if not (s.kind == "exp" and not s.epsilon)]
        return ConjugacyResult("conjugate",
                               witness=witness_from_steps(ca, steps, v, w))
    return ConjugacyResult(
        "not-conjugate",
        invariant="canonical representative "
                  f"({ca.ident.label} classifier)",
        values=(sv.brief(), sw.brief()))


# ---------------------------------------------------------------------------
# generic fallback: invariants + bounded numeric word search
# ---------------------------------------------------------------------------

def _membership_pattern(L: LieAlgebra, v: Sequence[Fraction]) -> Tuple[bool, ...]:
    from .algebra import _subspace_brackets, _in_span_coords
    from .linalg import identity as _id

    pats = []
    full = _id(L.dim)
    cur = _subspace_brackets(L, full, full)
    for _ in range(3):
        pats.append(_in_span_coords(cur, list(v)) is not None if cur else not any(v))
        if not cur:
            break
        cur = _subspace_brackets(L, cur, cur)
    return tuple(pats)


def _are_conjugate_generic(L: LieAlgebra, v, w,
                           max_len: Optional[int] = None) -> ConjugacyResult:
    pv = _membership_pattern(L, v)
    pw = _membership_pattern(L, w)
    if pv != pw:
        return ConjugacyResult("not-conjugate",
                               invariant="derived-series membership",
                               values=(str(pv), str(pw)))
    n = L.dim
    max_len = max_len or n
    ads = [_np(ad_matrix_rational(L, i)) for i in range(n)]
    x0 = np.array([float(t) for t in v])
    y = np.array([float(t) for t in w])
    rng = random.Random(1234)

    def apply_word(indices, eps):
        x = x0.copy()
        for i, e in zip(indices, eps):
            x = _expm_np(e * ads[i]) @ x
        return x

    best = None
    for length in range(1, max_len + 1):
        for indices in itertools.product(range(n), repeat=length):
            for trial in range(6):
                eps = np.array([rng.uniform(-2, 2) for _ in range(length)])
                # damped Gauss-Newton on the projective residual
                for it in range(60):
                    r0 = projective_residual(apply_word(indices, eps), y)
                    if r0 < RESIDUAL_TOL:
                        break
                    grad = np.zeros(length)
                    h = 1e-6
                    for k in range(length):
                        pe = eps.copy()
                        pe[k] += h
                        grad[k] = (projective_residual(apply_word(indices, pe), y)
                                   - r0) / h
                    gn = np.linalg.norm(grad)
                    if gn < 1e-14:
                        break
                    eps = eps - r0 * grad / (gn * gn + 1e-12)
                r = projective_residual(apply_word(indices, eps), y)
                if r < RESIDUAL_TOL:
                    steps = tuple(Step("exp", i, epsilon=float(e))
                                  for i, e in zip(indices, eps))
                    return ConjugacyResult(
                        "conjugate",
                        witness=ConjugacyWitness(steps, 1.0, r))
                if best is None or r < best:
                    best = r
    return ConjugacyResult("undecided")


# ---------------------------------------------------------------------------
# candidate-system audits
# ---------------------------------------------------------------------------

@dataclass
class AuditReport:
    """Pairwise conjugacy audit plus a seeded coverage audit."""

    conjugate_pairs: List[Tuple[int, int, ConjugacyWitness]]
    gaps: List[Tuple[int, Tuple[Fraction, ...], str]]
    duplicates: List[Tuple[int, Tuple[int, ...]]]
    n_samples: int
    seed: int
    undecided: int = 0

    @property
    def ok(self) -> bool:
        return not self.conjugate_pairs and not self.gaps

    @property
    def undecided_rate(self) -> float:
        return self.undecided / self.n_samples if self.n_samples else 0.0

    def summary(self) -> str:
        lines = [
            f"pairs flagged: {len(self.conjugate_pairs)}",
            f"coverage gaps: {len(self.gaps)} of {self.n_samples} samples",
            f"duplicate-covered samples: {len(self.duplicates)}",
            f"undecided rate: {self.undecided_rate:.4f}",
            f"seed: {self.seed}",
        ]
        return "\n".join(lines)


def _sample_directions(n: int, count: int, seed: int):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        vec = tuple(Fraction(rng.randint(-20, 20), rng.randint(1, 4))
                    for _ in range(n))
        if any(x != 0 for x in vec) and all(abs(x) <= 5 for x in vec):
            out.append(vec)
    return out


def _candidate_signatures(ca: ClassifiedAlgebra, cand: SubalgebraRep,
                          probes: Sequence[Fraction]) -> List[Signature]:
    """Classify frozen instances of a candidate (probing its parameters)."""
    sigs = []
    if cand.frozen():
        vec = cand.rational_coeffs()
        if vec is None:
            return []
        return [ca.classify(vec)]
    if len(cand.params) == 1:
        p = cand.params[0]
        for val in probes:
            if not p.admits(val):
                continue
            try:
                vec = cand.instantiate({p.name: val})
            except ExprError:
                continue
            if any(vec):
                sigs.append(ca.classify(vec))
    else:
        vals = [Fraction(2), Fraction(3), Fraction(-3)]
        for combo in itertools.product(vals, repeat=len(cand.params)):
            values = {}
            ok = True
            for p, val in zip(cand.params, combo):
                if not p.admits(val):
                    ok = False
                    break
                values[p.name] = val
            if not ok:
                continue
            try:
                vec = cand.instantiate(values)
            except ExprError:
                continue
            if any(vec):
                sigs.append(ca.classify(vec))
    return sigs


def _special_param_values(ca: ClassifiedAlgebra,
                          cand: SubalgebraRep) -> List[Fraction]:
    """Parameter values where the candidate's canonical coordinates change
    their zero pattern (affine coordinates' roots)."""
    if len(cand.params) != 1:
        return []
    pname = cand.params[0].name
    coords = ca.algebra_coords_symbolic(cand)
    out = []
    for c in coords:
        root = _affine_root(c, pname)
        if root is not None:
            out.append(root)
    return out


def _affine_root(e: Expr, pname: str) -> Optional[Fraction]:
    """Root of an expression affine in pname, if any."""
    d = substitute(e, {pname: rat(0)})
    s = substitute(e, {pname: rat(1)})
    if not isinstance(d, Rat) or not isinstance(s, Rat):
        return None
    slope = s.value - d.value
    if slope == 0:
        return None
    return -d.value / slope


def _covers(ca: ClassifiedAlgebra, cand: SubalgebraRep,
            target: Signature) -> Optional[Dict[str, Fraction]]:
    """Does the candidate's class overlap the target signature?  Returns the
    instantiating parameter values when it does (empty dict for frozen)."""
    if cand.rep_id:
        # the candidate came from construct_optimal_system: direct check
        rep = next((r for r in ca.strategy.reps() if r.rep_id == cand.rep_id),
                   None)
        if rep is None or rep.rep_id != target.rep_id:
            return None
        for p in rep.params:
            if p.name not in target.params or not p.admits(target.params[p.name]):
                return None
        return {}
    if cand.frozen():
        vec = cand.rational_coeffs()
        if vec is None or not any(vec):
            return None
        return {} if ca.classify(vec).matches(target) else None
    if len(cand.params) != 1:
        for sig in _candidate_signatures(ca, cand,
                                         [Fraction(2), Fraction(3)]):
            if sig.matches(target):
                return {}
        return None
    p = cand.params[0]
    trial_values: List[Fraction] = []
    trial_values += _special_param_values(ca, cand)
    trial_values += [Fraction(2), Fraction(3), Fraction(-2), Fraction(5),
                     Fraction(1), Fraction(-1)]
    # solve ratio equations against the target's family parameters
    trial_values += _ratio_solutions(ca, cand, target, p.name)
    seen = set()
    for val in trial_values:
        if val in seen or not p.admits(val):
            continue
        seen.add(val)
        try:
            vec = cand.instantiate({p.name: val})
        except ExprError:
            continue
        if not any(vec):
            continue
        if ca.classify(vec).matches(target):
            return {p.name: val}
    return None


def _ratio_solutions(ca: ClassifiedAlgebra, cand: SubalgebraRep,
                     target: Signature, pname: str) -> List[Fraction]:
    """Candidate parameter values solving coordinate-ratio equations against
    each target family parameter (the canonical family parameters are ratios
    of canonical coordinates)."""
    coords = ca.algebra_coords_symbolic(cand)
    out: List[Fraction] = []
    values = [x for x in target.params.values()]
    ratios = set()
    for tv in values:
        if isinstance(tv, Fraction):
            ratios.add(tv)
            if tv != 0:
                ratios.add(1 / tv)
            ratios.add(-tv)
    for i in range(len(coords)):
        for j in range(len(coords)):
            if i == j:
                continue
            for a0 in ratios:
                # coords[i] - a0*coords[j] = 0, affine in the parameter
                expr = add(coords[i], mul(rat(-a0), coords[j]))
                root = _affine_root(expr, pname)
                if root is not None:
                    out.append(root)
    return out


def _classified_algebra_coords_symbolic(self, cand: SubalgebraRep) -> List[Expr]:
    out: List[Expr] = [ZERO] * self.L.dim
    for i in range(self.L.dim):
        acc = ZERO
        for j in range(self.L.dim):
            if self.to_canonical[i][j]:
                acc = add(acc, mul(rat(self.to_canonical[i][j]),
                                   cand.coeffs[j]))
        out[i] = acc
    return out


ClassifiedAlgebra.algebra_coords_symbolic = _classified_algebra_coords_symbolic


def verify_candidate_system(L: LieAlgebra, candidates: Sequence[SubalgebraRep],
                            n_samples: int = DEFAULT_SAMPLES,
                            seed: int = DEFAULT_SEED,
                            ident: Optional[Identification] = None
                            ) -> AuditReport:
    """Audit a candidate optimal system: flag conjugate pairs and classify
    seeded sample directions against the list (gaps and duplicates)."""
    ca = ClassifiedAlgebra.build(L, ident)
    probes = [Fraction(2), Fraction(3), Fraction(-3), Fraction(5),
              Fraction(1), Fraction(-1), Fraction(1, 2)]
    pairs = []
    for i in range(len(candidates)):
        sigs_i = _candidate_signatures(ca, candidates[i], probes)
        extra = [s for s in
                 (_special_param_values(ca, candidates[i]) if
                  len(candidates[i].params) == 1 else [])]
        if extra and len(candidates[i].params) == 1:
            p = candidates[i].params[0]
            for val in extra:
                if p.admits(val):
                    try:
                        vec = candidates[i].instantiate({p.name: val})
                        if any(vec):
                            sigs_i.append(ca.classify(vec))
                    except ExprError:
                        pass
        for j in range(len(candidates)):
            if j == i:
                continue
            flagged = None
            for sig in sigs_i:
                got = _covers(ca, candidates[j], sig)
                if got is not None:
                    flagged = sig
                    break
            if flagged is not None and i < j:
                # build a witness at the overlapping instance
                vec_i = _instance_for_signature(ca, candidates[i], flagged,
                                                probes)
                vec_j_params = _covers(ca, candidates[j], flagged)
                vec_j = _instance_for_signature(ca, candidates[j], flagged,
                                                probes)
                if vec_i is not None and vec_j is not None:
                    res = are_conjugate(L, vec_i, vec_j, ident=ca.ident)
                    if res.conjugate:
                        pairs.append((i, j, res.witness))
    gaps = []
    duplicates = []
    undecided = 0
    for si, vec in enumerate(_sample_directions(L.dim, n_samples, seed)):
        try:
            sig = ca.classify(vec)
        except Exception:
            undecided += 1
            continue
        covering = []
        for ci, cand in enumerate(candidates):
            if _covers(ca, cand, sig) is not None:
                covering.append(ci)
        if not covering:
            gaps.append((si, vec, sig.brief()))
        elif len(covering) > 1:
            duplicates.append((si, tuple(covering)))
    return AuditReport(conjugate_pairs=pairs, gaps=gaps,
                       duplicates=duplicates, n_samples=n_samples,
                       seed=seed, undecided=undecided)


def _instance_for_signature(ca: ClassifiedAlgebra, cand: SubalgebraRep,
                            sig: Signature, probes) -> Optional[List[Fraction]]:
    if cand.frozen():
        vec = cand.rational_coeffs()
        return list(vec) if vec is not None else None
    got = _covers(ca, cand, sig)
    if got is None:
        return None
    if not got and cand.params:
        # constructed rep covering via rep_id: instantiate at the target
        values = {}
        for p in cand.params:
            tv = sig.params.get(p.name)
            if tv is None or not isinstance(tv, Fraction):
                return None
            values[p.name] = tv
        try:
            return list(cand.instantiate(values))
        except ExprError:
            return None
    try:
        return list(cand.instantiate(got))
    except ExprError:
        return None
