"""Second-order jet space: total derivatives and prolongation of point fields.

Jet coordinates are named ``u``, ``u_t``, ``u_x``, ``u_tt``, ``u_tx``,
``u_xx`` (t-derivatives listed before x-derivatives).  Public results are
capped at order 2; order-3 coordinates exist so that total derivatives of
order-2 expressions can be formed where a caller explicitly allows it.
"""

from __future__ import annotations

from dataclasses import dataclass
from .expr import (
    Expr, ExprError, SymbolTable, ZERO, add, differentiate, free_symbols,
    mul, sym,
)


class OrderOverflowError(ExprError):
    """A total derivative would need a jet beyond the allowed order."""


T = sym("t")
X = sym("x")
U = sym("u")

#: dependent variable name
DEP = "u"


def jet_name(dt: int, dx: int) -> str:
    if dt == 0 and dx == 0:
        return DEP
    return DEP + "_" + "t" * dt + "x" * dx


def jet(dt: int, dx: int) -> Expr:
    return sym(jet_name(dt, dx))


def base_symbols(max_order: int = 3) -> SymbolTable:
    """Symbol table with t, x and jets of u up to ``max_order``."""
    table = SymbolTable()
    table.variable("t")
    table.variable("x")
    for n in range(max_order + 1):
        for dt in range(n + 1):
            table.jet(jet_name(dt, n - dt), DEP, (dt, n - dt))
    return table


def dcr_symbols() -> SymbolTable:
    """Default table for the diffusion-convection-reaction family."""
    table = base_symbols()
    for name in ("m", "p", "b0", "b1", "c0", "c1"):
        table.parameter(name)
    table.function("phi")
    table.function("f")
    return table


def jet_order(e: Expr, table: SymbolTable) -> int:
    """Highest jet order appearing in the expression (0 if only u)."""
    order = 0
    for name in free_symbols(e):
        entry = table.jet_index.get(name)
        if entry is not None:
            order = max(order, sum(entry[1]))
    return order


def total_derivative(e: Expr, direction: str, table: SymbolTable,
                     max_order: int = 2) -> Expr:
    """Total derivative D_t or D_x on a jet expression.

    ``max_order`` bounds the jets allowed in the *result*; exceeding it
    raises :class:`OrderOverflowError`.
    """
    if direction not in ("t", "x"):
        raise ValueError("direction must be 't' or 'x'")
    out = differentiate(e, direction)
    for name in sorted(free_symbols(e)):
        entry = table.jet_index.get(name)
        if entry is None:
            continue
        partial = differentiate(e, name)
        if partial.is_zero_literal:
            continue
        dt, dx = entry[1]
        if direction == "t":
            dt += 1
        else:
            dx += 1
        if dt + dx > max_order:
            raise OrderOverflowError(
                f"total derivative needs jet {jet_name(dt, dx)} beyond order {max_order}")
        out = add(out, mul(jet(dt, dx), partial))
    return out


@dataclass(frozen=True)
class VectorField:
    """Point-symmetry generator xi_t*d/dt + xi_x*d/dx + eta*d/du.

    Coefficients are expressions in (t, x, u) only."""

    xi_t: Expr
    xi_x: Expr
    eta: Expr

    def validate(self, table: SymbolTable) -> "VectorField":
        for coef in (self.xi_t, self.xi_x, self.eta):
            for name in free_symbols(coef):
                entry = table.jet_index.get(name)
                if entry is not None and sum(entry[1]) > 0:
                    raise ExprError(
                        f"vector field coefficient depends on jet {name}")
        return self

    def is_zero(self) -> bool:
        return (self.xi_t.is_zero_literal and self.xi_x.is_zero_literal
                and self.eta.is_zero_literal)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(add(self.xi_t, other.xi_t),
                           add(self.xi_x, other.xi_x),
                           add(self.eta, other.eta))

    def scale(self, c) -> "VectorField":
        return VectorField(mul(c, self.xi_t), mul(c, self.xi_x),
                           mul(c, self.eta))

    def apply_to(self, e: Expr) -> Expr:
        """Apply the first-order operator to a function of (t, x, u)."""
        return add(mul(self.xi_t, differentiate(e, "t")),
                   mul(self.xi_x, differentiate(e, "x")),
                   mul(self.eta, differentiate(e, "u")))


ZERO_FIELD = VectorField(ZERO, ZERO, ZERO)


@dataclass(frozen=True)
class ProlongedField:
    """Second prolongation: base field plus coefficients for d/du_t, d/du_x
    and d/du_xx."""

    field: VectorField
    eta_t: Expr
    eta_x: Expr
    eta_xx: Expr


def prolong2(field: VectorField, table: SymbolTable) -> ProlongedField:
    """Second prolongation via the recursive total-derivative formulas.

    eta^J,z = D_z(eta^J) - u_{J,t} D_z(xi_t) - u_{J,x} D_z(xi_x); the mixed
    jet u_tx enters eta_xx whenever xi_t depends on x or u.
    """
    xi_t, xi_x, eta = field.xi_t, field.xi_x, field.eta

    def d(e, z):
        return total_derivative(e, z, table, max_order=2)

    eta_t = add(d(eta, "t"),
                mul(-1, jet(1, 0), d(xi_t, "t")),
                mul(-1, jet(0, 1), d(xi_x, "t")))
    eta_x = add(d(eta, "x"),
                mul(-1, jet(1, 0), d(xi_t, "x")),
                mul(-1, jet(0, 1), d(xi_x, "x")))
    eta_xx = add(d(eta_x, "x"),
                 mul(-1, jet(1, 1), d(xi_t, "x")),
                 mul(-1, jet(0, 2), d(xi_x, "x")))
    return ProlongedField(field, eta_t, eta_x, eta_xx)
