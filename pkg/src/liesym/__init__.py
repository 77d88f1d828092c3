"""liesym: exact Lie-symmetry toolkit for diffusion-convection-reaction
equations.

Subpackages follow the pipeline: expression kernel -> jets/prolongation ->
PDE family -> symmetry verification and search -> equivalence
transformations -> Lie algebra identification -> optimal systems of
one-dimensional subalgebras -> reductions and exact solutions -> case
catalog and command line."""

from .expr import (
    Expr, ExprError, Rat, Sym, SymbolKind, SymbolTable, UndeclaredSymbolError,
    ZeroVerdict, add, differentiate, exp, func, is_zero, log, mul, powx, rat,
    simplify, substitute, sym,
)
from .jets import ProlongedField, VectorField, prolong2, total_derivative

__version__ = "0.1.0"

__all__ = [
    "Expr", "ExprError", "Rat", "Sym", "SymbolKind", "SymbolTable",
    "UndeclaredSymbolError", "ZeroVerdict", "add", "differentiate", "exp",
    "func", "is_zero", "log", "mul", "powx", "rat", "simplify", "substitute",
    "sym", "ProlongedField", "VectorField", "prolong2", "total_derivative",
    "__version__",
]
