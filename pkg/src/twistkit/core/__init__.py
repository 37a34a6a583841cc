"""Exact symbolic core: atoms, polynomials, expressions, derivations."""

from .atoms import (
    Atom,
    AuxJetVar,
    ConstSym,
    ExpAtom,
    FuncAtom,
    IndepVar,
    JetVar,
    LinForm,
    MultiIndex,
    mi_append,
    mi_leq,
    mi_order,
    mi_sub,
    mi_zero,
)
from .derivation import Derivation, linform_expr, partial
from .evaluate import (
    agree_oracle,
    eval_at,
    random_eval,
    sample_assignment,
    sample_atoms,
    zero_oracle,
)
from .expression import (
    Expr,
    ONE,
    ZERO,
    arith,
    as_single_atom,
    const,
    depends_on_aux,
    exp_of,
    func,
    is_zero,
    iter_atoms,
    max_jet_order,
    normalize,
    pow_of,
    substitute,
    u_,
    w_,
    x_,
)
from .polynomial import Poly, divmod_multi, exact_div
from .gcd import poly_gcd, perfect_power
from .printing import Names, render_atom, render_expr, render_poly

__all__ = [
    "Atom", "AuxJetVar", "ConstSym", "ExpAtom", "FuncAtom", "IndepVar",
    "JetVar", "LinForm", "MultiIndex", "mi_append", "mi_leq", "mi_order",
    "mi_sub", "mi_zero", "Derivation", "linform_expr", "partial",
    "agree_oracle", "eval_at", "random_eval", "sample_assignment",
    "sample_atoms", "zero_oracle", "Expr", "ONE", "ZERO", "arith",
    "as_single_atom", "const", "depends_on_aux", "exp_of", "func", "is_zero",
    "iter_atoms", "max_jet_order", "normalize", "pow_of", "substitute",
    "u_", "w_", "x_", "Poly", "divmod_multi", "exact_div", "poly_gcd",
    "perfect_power", "Names", "render_atom", "render_expr", "render_poly",
]
